//! Reverse-mode automatic differentiation over dense rank-2 tensors.
//!
//! The tape is rebuilt for every forward pass (define-by-run). Ops reference
//! earlier tensor ids only, so a single reverse sweep in creation order
//! yields exact gradients. `backward` consumes the op graph: after it runs,
//! only leaf gradients remain readable.
//!
//! Graph-structured models use the indexed ops (`gather`, `segment_*`,
//! `spmm`) for sparse neighbor propagation; everything else is standard
//! dense machinery.

use std::rc::Rc;

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tensor(pub(crate) usize);

/// Contiguous row ranges grouping per-edge rows by destination node.
#[derive(Debug, Clone)]
pub struct Segments {
    pub offsets: Vec<usize>,
}

impl Segments {
    pub fn num_segments(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_rows(&self) -> usize {
        *self.offsets.last().expect("non-empty offsets")
    }

    pub fn range(&self, seg: usize) -> std::ops::Range<usize> {
        self.offsets[seg]..self.offsets[seg + 1]
    }
}

/// Row-compressed sparse matrix with fixed (non-learnable) coefficients.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub offsets: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
    pub num_cols: usize,
}

impl SparseMatrix {
    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Masked two-class cross-entropy targets: only the listed rows contribute.
#[derive(Debug, Clone)]
pub struct CeTargets {
    pub rows: Vec<u32>,
    pub classes: Vec<u8>,
    pub weights: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduce {
    Min,
    Max,
}

enum Op {
    Leaf,
    MatMul(Tensor, Tensor),
    Add(Tensor, Tensor),
    Sub(Tensor, Tensor),
    AddBias(Tensor, Tensor),
    MulElem(Tensor, Tensor),
    MulCol(Tensor, Tensor),
    AddConst(Tensor),
    ScaleConst(Tensor, f64),
    ScaleScalar(Tensor, Tensor),
    Relu(Tensor),
    LeakyRelu(Tensor, f64),
    Sigmoid(Tensor),
    Square(Tensor),
    Concat(Tensor, Tensor),
    Dropout(Tensor, Rc<Array2<f64>>),
    Gather(Tensor, Rc<Vec<u32>>),
    SegmentSum(Tensor, Rc<Segments>),
    SegmentMean(Tensor, Rc<Segments>),
    SegmentExtremum {
        input: Tensor,
        segments: Rc<Segments>,
        winners: Vec<u32>,
    },
    SegmentSoftmax(Tensor, Rc<Segments>),
    SpMM(Tensor, Rc<SparseMatrix>),
    SumAll(Tensor),
    MeanAll(Tensor),
    MaskedCe {
        logits: Tensor,
        targets: Rc<CeTargets>,
        probs: Array2<f64>,
        weight_sum: f64,
    },
}

struct Node {
    value: Array2<f64>,
    grad: Option<Array2<f64>>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Tensor {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
        });
        Tensor(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Tensor {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, t: Tensor) -> &Array2<f64> {
        &self.nodes[t.0].value
    }

    /// Gradient of the last backward pass, if this tensor was on the path.
    pub fn grad(&self, t: Tensor) -> Option<&Array2<f64>> {
        self.nodes[t.0].grad.as_ref()
    }

    pub fn take_grad(&mut self, t: Tensor) -> Option<Array2<f64>> {
        self.nodes[t.0].grad.take()
    }

    fn dims(&self, t: Tensor) -> (usize, usize) {
        self.nodes[t.0].value.dim()
    }

    // ---------------------------------------------------------------- ops

    pub fn matmul(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let (ar, ac) = self.dims(a);
        let (br, _) = self.dims(b);
        assert_eq!(ac, br, "matmul inner dims {} vs {}", ac, br);
        let _ = ar;
        let value = self.nodes[a.0].value.dot(&self.nodes[b.0].value);
        self.push(value, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Tensor, b: Tensor) -> Tensor {
        assert_eq!(self.dims(a), self.dims(b), "add shapes");
        let value = &self.nodes[a.0].value + &self.nodes[b.0].value;
        self.push(value, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Tensor, b: Tensor) -> Tensor {
        assert_eq!(self.dims(a), self.dims(b), "sub shapes");
        let value = &self.nodes[a.0].value - &self.nodes[b.0].value;
        self.push(value, Op::Sub(a, b))
    }

    /// Adds a 1 x d bias row to every row of `x`.
    pub fn add_bias(&mut self, x: Tensor, bias: Tensor) -> Tensor {
        let (_, xc) = self.dims(x);
        let (br, bc) = self.dims(bias);
        assert_eq!((br, bc), (1, xc), "bias must be 1 x {}", xc);
        let value = &self.nodes[x.0].value + &self.nodes[bias.0].value;
        self.push(value, Op::AddBias(x, bias))
    }

    pub fn mul_elem(&mut self, a: Tensor, b: Tensor) -> Tensor {
        assert_eq!(self.dims(a), self.dims(b), "mul_elem shapes");
        let value = &self.nodes[a.0].value * &self.nodes[b.0].value;
        self.push(value, Op::MulElem(a, b))
    }

    /// Scales row i of `x` by `col[i]`; `col` is n x 1.
    pub fn mul_col(&mut self, x: Tensor, col: Tensor) -> Tensor {
        let (xr, _) = self.dims(x);
        assert_eq!(self.dims(col), (xr, 1), "mul_col column shape");
        let value = &self.nodes[x.0].value * &self.nodes[col.0].value;
        self.push(value, Op::MulCol(x, col))
    }

    pub fn add_const(&mut self, x: Tensor, c: f64) -> Tensor {
        let value = self.nodes[x.0].value.mapv(|v| v + c);
        self.push(value, Op::AddConst(x))
    }

    pub fn scale_const(&mut self, x: Tensor, c: f64) -> Tensor {
        let value = self.nodes[x.0].value.mapv(|v| v * c);
        self.push(value, Op::ScaleConst(x, c))
    }

    /// Multiplies every element of `x` by the 1 x 1 tensor `s`.
    pub fn scale_scalar(&mut self, x: Tensor, s: Tensor) -> Tensor {
        assert_eq!(self.dims(s), (1, 1), "scale_scalar expects 1 x 1 scalar");
        let sv = self.nodes[s.0].value[(0, 0)];
        let value = self.nodes[x.0].value.mapv(|v| v * sv);
        self.push(value, Op::ScaleScalar(x, s))
    }

    pub fn relu(&mut self, x: Tensor) -> Tensor {
        let value = self.nodes[x.0].value.mapv(|v| v.max(0.0));
        self.push(value, Op::Relu(x))
    }

    pub fn leaky_relu(&mut self, x: Tensor, slope: f64) -> Tensor {
        let value = self.nodes[x.0]
            .value
            .mapv(|v| if v > 0.0 { v } else { slope * v });
        self.push(value, Op::LeakyRelu(x, slope))
    }

    pub fn sigmoid(&mut self, x: Tensor) -> Tensor {
        let value = self.nodes[x.0].value.mapv(sigmoid);
        self.push(value, Op::Sigmoid(x))
    }

    pub fn square(&mut self, x: Tensor) -> Tensor {
        let value = self.nodes[x.0].value.mapv(|v| v * v);
        self.push(value, Op::Square(x))
    }

    /// Concatenates columns: `[a | b]`.
    pub fn concat(&mut self, a: Tensor, b: Tensor) -> Tensor {
        assert_eq!(self.dims(a).0, self.dims(b).0, "concat row counts");
        let value = concatenate(
            Axis(1),
            &[self.nodes[a.0].value.view(), self.nodes[b.0].value.view()],
        )
        .expect("same row count");
        self.push(value, Op::Concat(a, b))
    }

    /// Inverted dropout with keep-scaling; `rate == 0` is the identity.
    /// Evaluation mode simply skips this op.
    pub fn dropout(&mut self, x: Tensor, rate: f64, rng: &mut impl Rng) -> Tensor {
        assert!((0.0..1.0).contains(&rate), "dropout rate in [0, 1)");
        if rate == 0.0 {
            return x;
        }
        let keep = 1.0 - rate;
        let dims = self.dims(x);
        let mask = Array2::from_shape_fn(dims, |_| {
            if rng.random::<f64>() < keep {
                1.0 / keep
            } else {
                0.0
            }
        });
        self.dropout_masked(x, Rc::new(mask))
    }

    /// Dropout with a caller-supplied mask, for reproducible checks.
    pub fn dropout_masked(&mut self, x: Tensor, mask: Rc<Array2<f64>>) -> Tensor {
        assert_eq!(self.dims(x), mask.dim(), "dropout mask shape");
        let value = &self.nodes[x.0].value * mask.as_ref();
        self.push(value, Op::Dropout(x, mask))
    }

    /// Selects rows of `x`: output row k is `x[rows[k]]`.
    pub fn gather(&mut self, x: Tensor, rows: Rc<Vec<u32>>) -> Tensor {
        let (xr, xc) = self.dims(x);
        let mut value = Array2::zeros((rows.len(), xc));
        for (k, &r) in rows.iter().enumerate() {
            assert!((r as usize) < xr, "gather row {} out of {}", r, xr);
            value
                .row_mut(k)
                .assign(&self.nodes[x.0].value.row(r as usize));
        }
        self.push(value, Op::Gather(x, rows))
    }

    pub fn segment_sum(&mut self, x: Tensor, segments: Rc<Segments>) -> Tensor {
        let (xr, xc) = self.dims(x);
        assert_eq!(xr, segments.num_rows(), "segment rows");
        let mut value = Array2::zeros((segments.num_segments(), xc));
        for seg in 0..segments.num_segments() {
            for r in segments.range(seg) {
                let row = self.nodes[x.0].value.row(r);
                value.row_mut(seg).scaled_add(1.0, &row);
            }
        }
        self.push(value, Op::SegmentSum(x, segments))
    }

    /// Mean over each segment; empty segments produce zero rows.
    pub fn segment_mean(&mut self, x: Tensor, segments: Rc<Segments>) -> Tensor {
        let (xr, xc) = self.dims(x);
        assert_eq!(xr, segments.num_rows(), "segment rows");
        let mut value = Array2::zeros((segments.num_segments(), xc));
        for seg in 0..segments.num_segments() {
            let range = segments.range(seg);
            let len = range.len();
            if len == 0 {
                continue;
            }
            for r in range {
                let row = self.nodes[x.0].value.row(r);
                value.row_mut(seg).scaled_add(1.0 / len as f64, &row);
            }
        }
        self.push(value, Op::SegmentMean(x, segments))
    }

    /// Per-segment, per-column min or max; empty segments produce zero rows.
    fn segment_extremum(&mut self, x: Tensor, segments: Rc<Segments>, kind: Reduce) -> Tensor {
        let (xr, xc) = self.dims(x);
        assert_eq!(xr, segments.num_rows(), "segment rows");
        let nseg = segments.num_segments();
        let mut value = Array2::zeros((nseg, xc));
        let mut winners = vec![u32::MAX; nseg * xc];
        for seg in 0..nseg {
            let range = segments.range(seg);
            if range.is_empty() {
                continue;
            }
            for c in 0..xc {
                let mut best_row = range.start;
                let mut best = self.nodes[x.0].value[(range.start, c)];
                for r in range.clone().skip(1) {
                    let v = self.nodes[x.0].value[(r, c)];
                    let better = match kind {
                        Reduce::Min => v < best,
                        Reduce::Max => v > best,
                    };
                    if better {
                        best = v;
                        best_row = r;
                    }
                }
                value[(seg, c)] = best;
                winners[seg * xc + c] = best_row as u32;
            }
        }
        self.push(
            value,
            Op::SegmentExtremum {
                input: x,
                segments,
                winners,
            },
        )
    }

    pub fn segment_min(&mut self, x: Tensor, segments: Rc<Segments>) -> Tensor {
        self.segment_extremum(x, segments, Reduce::Min)
    }

    pub fn segment_max(&mut self, x: Tensor, segments: Rc<Segments>) -> Tensor {
        self.segment_extremum(x, segments, Reduce::Max)
    }

    /// Column-wise softmax within each segment (attention normalization).
    pub fn segment_softmax(&mut self, x: Tensor, segments: Rc<Segments>) -> Tensor {
        let (xr, xc) = self.dims(x);
        assert_eq!(xr, segments.num_rows(), "segment rows");
        let mut value = Array2::zeros((xr, xc));
        for seg in 0..segments.num_segments() {
            let range = segments.range(seg);
            if range.is_empty() {
                continue;
            }
            for c in 0..xc {
                let mut max = f64::NEG_INFINITY;
                for r in range.clone() {
                    max = max.max(self.nodes[x.0].value[(r, c)]);
                }
                let mut total = 0.0;
                for r in range.clone() {
                    let e = (self.nodes[x.0].value[(r, c)] - max).exp();
                    value[(r, c)] = e;
                    total += e;
                }
                for r in range.clone() {
                    value[(r, c)] /= total;
                }
            }
        }
        self.push(value, Op::SegmentSoftmax(x, segments))
    }

    /// Multiplies fixed sparse coefficients into `x`: row i of the output is
    /// the coefficient-weighted sum of the referenced rows of `x`.
    pub fn spmm(&mut self, sp: Rc<SparseMatrix>, x: Tensor) -> Tensor {
        let (xr, xc) = self.dims(x);
        assert_eq!(xr, sp.num_cols, "spmm input rows");
        let mut value = Array2::zeros((sp.num_rows(), xc));
        for i in 0..sp.num_rows() {
            for k in sp.offsets[i]..sp.offsets[i + 1] {
                let row = self.nodes[x.0].value.row(sp.cols[k] as usize);
                value.row_mut(i).scaled_add(sp.vals[k], &row);
            }
        }
        self.push(value, Op::SpMM(x, sp))
    }

    pub fn sum_all(&mut self, x: Tensor) -> Tensor {
        let s = self.nodes[x.0].value.sum();
        self.push(Array2::from_elem((1, 1), s), Op::SumAll(x))
    }

    pub fn mean_all(&mut self, x: Tensor) -> Tensor {
        let m = self.nodes[x.0].value.mean().unwrap_or(0.0);
        self.push(Array2::from_elem((1, 1), m), Op::MeanAll(x))
    }

    /// Weighted mean negative log-likelihood over the masked rows of a
    /// two-logit matrix. Rows outside the mask contribute nothing, so
    /// perturbing their labels can never change the loss.
    pub fn masked_cross_entropy(
        &mut self,
        logits: Tensor,
        targets: Rc<CeTargets>,
    ) -> Result<Tensor> {
        let (rows, cols) = self.dims(logits);
        if cols != 2 {
            return Err(Error::Shape {
                context: "masked_cross_entropy",
                expected: "n x 2 logits".into(),
                actual: format!("{} x {}", rows, cols),
            });
        }
        if targets.rows.is_empty() {
            return Err(Error::EmptyMask);
        }
        debug_assert_eq!(targets.rows.len(), targets.classes.len());

        let mut probs = Array2::zeros((targets.rows.len(), 2));
        let mut weight_sum = 0.0;
        let mut loss = 0.0;
        for (k, (&r, &class)) in targets.rows.iter().zip(&targets.classes).enumerate() {
            let z0 = self.nodes[logits.0].value[(r as usize, 0)];
            let z1 = self.nodes[logits.0].value[(r as usize, 1)];
            let m = z0.max(z1);
            let lse = m + ((z0 - m).exp() + (z1 - m).exp()).ln();
            probs[(k, 0)] = (z0 - lse).exp();
            probs[(k, 1)] = (z1 - lse).exp();
            let w = targets.weights[class as usize];
            let zy = if class == 0 { z0 } else { z1 };
            loss += w * (lse - zy);
            weight_sum += w;
        }
        if weight_sum <= 0.0 {
            return Err(Error::EmptyMask);
        }
        loss /= weight_sum;
        Ok(self.push(
            Array2::from_elem((1, 1), loss),
            Op::MaskedCe {
                logits,
                targets,
                probs,
                weight_sum,
            },
        ))
    }

    // ----------------------------------------------------------- backward

    fn accum(&mut self, t: Tensor, delta: Array2<f64>) {
        match &mut self.nodes[t.0].grad {
            Some(g) => *g += &delta,
            slot @ None => *slot = Some(delta),
        }
    }

    /// Reverse sweep from a scalar loss. Consumes the op graph: afterwards
    /// only gradients of tensors the sweep reached remain readable.
    pub fn backward(&mut self, loss: Tensor) -> Result<()> {
        if self.dims(loss) != (1, 1) {
            return Err(Error::Shape {
                context: "backward",
                expected: "1 x 1 scalar loss".into(),
                actual: format!("{} x {}", self.dims(loss).0, self.dims(loss).1),
            });
        }
        self.nodes[loss.0].grad = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..=loss.0).rev() {
            if self.nodes[i].grad.is_none() {
                continue;
            }
            let op = std::mem::replace(&mut self.nodes[i].op, Op::Leaf);
            if matches!(op, Op::Leaf) {
                continue;
            }
            let g = self.nodes[i].grad.take().expect("checked above");
            match op {
                Op::Leaf => unreachable!(),
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.nodes[b.0].value.t());
                    let gb = self.nodes[a.0].value.t().dot(&g);
                    self.accum(a, ga);
                    self.accum(b, gb);
                }
                Op::Add(a, b) => {
                    self.accum(a, g.clone());
                    self.accum(b, g);
                }
                Op::Sub(a, b) => {
                    self.accum(a, g.clone());
                    self.accum(b, -g);
                }
                Op::AddBias(x, bias) => {
                    let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    self.accum(x, g);
                    self.accum(bias, gb);
                }
                Op::MulElem(a, b) => {
                    let ga = &g * &self.nodes[b.0].value;
                    let gb = &g * &self.nodes[a.0].value;
                    self.accum(a, ga);
                    self.accum(b, gb);
                }
                Op::MulCol(x, col) => {
                    let gx = &g * &self.nodes[col.0].value;
                    let gcol = (&g * &self.nodes[x.0].value)
                        .sum_axis(Axis(1))
                        .insert_axis(Axis(1));
                    self.accum(x, gx);
                    self.accum(col, gcol);
                }
                Op::AddConst(x) => self.accum(x, g),
                Op::ScaleConst(x, c) => self.accum(x, g.mapv(|v| v * c)),
                Op::ScaleScalar(x, s) => {
                    let sv = self.nodes[s.0].value[(0, 0)];
                    let gs = (&g * &self.nodes[x.0].value).sum();
                    self.accum(x, g.mapv(|v| v * sv));
                    self.accum(s, Array2::from_elem((1, 1), gs));
                }
                Op::Relu(x) => {
                    let mask = self.nodes[i]
                        .value
                        .mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                    self.accum(x, g * mask);
                }
                Op::LeakyRelu(x, slope) => {
                    let mask = self.nodes[i]
                        .value
                        .mapv(|v| if v > 0.0 { 1.0 } else { slope });
                    self.accum(x, g * mask);
                }
                Op::Sigmoid(x) => {
                    let dy = self.nodes[i].value.mapv(|y| y * (1.0 - y));
                    self.accum(x, g * dy);
                }
                Op::Square(x) => {
                    let gx = 2.0 * &g * &self.nodes[x.0].value;
                    self.accum(x, gx);
                }
                Op::Concat(a, b) => {
                    let ac = self.dims(a).1;
                    let ga = g.slice(ndarray::s![.., ..ac]).to_owned();
                    let gb = g.slice(ndarray::s![.., ac..]).to_owned();
                    self.accum(a, ga);
                    self.accum(b, gb);
                }
                Op::Dropout(x, mask) => {
                    self.accum(x, g * mask.as_ref());
                }
                Op::Gather(x, rows) => {
                    let (xr, xc) = self.dims(x);
                    let mut gx = Array2::zeros((xr, xc));
                    for (k, &r) in rows.iter().enumerate() {
                        gx.row_mut(r as usize).scaled_add(1.0, &g.row(k));
                    }
                    self.accum(x, gx);
                }
                Op::SegmentSum(x, segments) => {
                    let (xr, xc) = self.dims(x);
                    let mut gx = Array2::zeros((xr, xc));
                    for seg in 0..segments.num_segments() {
                        for r in segments.range(seg) {
                            gx.row_mut(r).assign(&g.row(seg));
                        }
                    }
                    self.accum(x, gx);
                }
                Op::SegmentMean(x, segments) => {
                    let (xr, xc) = self.dims(x);
                    let mut gx = Array2::zeros((xr, xc));
                    for seg in 0..segments.num_segments() {
                        let range = segments.range(seg);
                        let len = range.len();
                        if len == 0 {
                            continue;
                        }
                        for r in range {
                            gx.row_mut(r).scaled_add(1.0 / len as f64, &g.row(seg));
                        }
                    }
                    self.accum(x, gx);
                }
                Op::SegmentExtremum {
                    input,
                    segments,
                    winners,
                } => {
                    let (xr, xc) = self.dims(input);
                    let mut gx = Array2::zeros((xr, xc));
                    for seg in 0..segments.num_segments() {
                        for c in 0..xc {
                            let w = winners[seg * xc + c];
                            if w != u32::MAX {
                                gx[(w as usize, c)] += g[(seg, c)];
                            }
                        }
                    }
                    self.accum(input, gx);
                }
                Op::SegmentSoftmax(x, segments) => {
                    let (xr, xc) = self.dims(x);
                    let alpha = &self.nodes[i].value;
                    let mut gx = Array2::zeros((xr, xc));
                    for seg in 0..segments.num_segments() {
                        let range = segments.range(seg);
                        for c in 0..xc {
                            let mut dot = 0.0;
                            for r in range.clone() {
                                dot += g[(r, c)] * alpha[(r, c)];
                            }
                            for r in range.clone() {
                                gx[(r, c)] = alpha[(r, c)] * (g[(r, c)] - dot);
                            }
                        }
                    }
                    self.accum(x, gx);
                }
                Op::SpMM(x, sp) => {
                    let (xr, xc) = self.dims(x);
                    let mut gx = Array2::zeros((xr, xc));
                    for row in 0..sp.num_rows() {
                        for k in sp.offsets[row]..sp.offsets[row + 1] {
                            gx.row_mut(sp.cols[k] as usize)
                                .scaled_add(sp.vals[k], &g.row(row));
                        }
                    }
                    self.accum(x, gx);
                }
                Op::SumAll(x) => {
                    let scalar = g[(0, 0)];
                    let dims = self.dims(x);
                    self.accum(x, Array2::from_elem(dims, scalar));
                }
                Op::MeanAll(x) => {
                    let dims = self.dims(x);
                    let scalar = g[(0, 0)] / (dims.0 * dims.1) as f64;
                    self.accum(x, Array2::from_elem(dims, scalar));
                }
                Op::MaskedCe {
                    logits,
                    targets,
                    probs,
                    weight_sum,
                } => {
                    let scalar = g[(0, 0)];
                    let (lr, lc) = self.dims(logits);
                    let mut gl = Array2::zeros((lr, lc));
                    for (k, (&r, &class)) in targets.rows.iter().zip(&targets.classes).enumerate() {
                        let w = targets.weights[class as usize] / weight_sum;
                        for c in 0..2 {
                            let indicator = if c == class as usize { 1.0 } else { 0.0 };
                            gl[(r as usize, c)] += scalar * w * (probs[(k, c)] - indicator);
                        }
                    }
                    self.accum(logits, gl);
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
