//! A reverse-mode gradient tape over small dense matrices.
//!
//! The tape only knows the handful of primitives the evidential pipeline
//! needs: dense layers, activations, the evidence → opinion map, Dempster's
//! rule and the Dirichlet loss. Every node stores its forward value; nodes
//! are appended in evaluation order, so walking the tape backwards is a valid
//! reverse topological order and each node is visited exactly once.
//!
//! Opinions travel through the tape as `n × (C + 1)` matrices whose last
//! column is the uncertainty mass.

use crate::error::{Error, Result};
use crate::fusion::dempster;
use crate::loss::view_loss_and_grad;

/// Row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "tensor data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension {
                    context: "tensor rows",
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scalar(&self) -> f64 {
        self.data[0]
    }

    fn add_assign(&mut self, other: &Tensor) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `a · b` for row-major matrices.
pub(crate) fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
    out
}

/// Numerically stable `ln(1 + e^z)`.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    AddBias(NodeId, NodeId),
    Relu(NodeId),
    Softplus(NodeId),
    AddScalar(NodeId),
    ToOpinion(NodeId),
    Dempster(NodeId, NodeId),
    OpinionToAlpha(NodeId),
    EvidentialLoss {
        alpha: NodeId,
        labels: Vec<usize>,
        lambda: f64,
    },
    Sum(Vec<NodeId>),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul(..) => "matmul",
            Op::AddBias(..) => "add_bias",
            Op::Relu(_) => "relu",
            Op::Softplus(_) => "softplus",
            Op::AddScalar(_) => "add_scalar",
            Op::ToOpinion(_) => "to_opinion",
            Op::Dempster(..) => "dempster",
            Op::OpinionToAlpha(_) => "opinion_to_alpha",
            Op::EvidentialLoss { .. } => "evidential_loss",
            Op::Sum(_) => "sum",
        }
    }
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Records a computation and differentiates a scalar output with respect to
/// every node.
#[derive(Default)]
pub struct GradTape {
    nodes: Vec<Node>,
}

/// Adjoints indexed by node; `None` for nodes the output does not depend on.
pub struct Gradients {
    adjoints: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.adjoints[id.0].as_ref()
    }
}

impl GradTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> Result<NodeId> {
        let index = self.nodes.len();
        if value.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                op: op.name(),
            });
        }
        self.nodes.push(Node { op, value });
        Ok(NodeId(index))
    }

    pub fn leaf(&mut self, value: Tensor) -> Result<NodeId> {
        self.push(Op::Leaf, value)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.cols != vb.rows {
            return Err(Error::Dimension {
                context: "matmul",
                expected: va.cols,
                actual: vb.rows,
            });
        }
        let out = matmul(va, vb);
        self.push(Op::MatMul(a, b), out)
    }

    /// Adds a `1 × n` bias row to every row of `a`.
    pub fn add_bias(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(bias));
        if vb.rows != 1 || vb.cols != va.cols {
            return Err(Error::Dimension {
                context: "add_bias",
                expected: va.cols,
                actual: vb.cols,
            });
        }
        let mut out = va.clone();
        for row in out.data.chunks_mut(va.cols) {
            for (o, b) in row.iter_mut().zip(&vb.data) {
                *o += b;
            }
        }
        self.push(Op::AddBias(a, bias), out)
    }

    pub fn relu(&mut self, a: NodeId) -> Result<NodeId> {
        let mut out = self.value(a).clone();
        out.data.iter_mut().for_each(|v| *v = v.max(0.0));
        self.push(Op::Relu(a), out)
    }

    pub fn softplus(&mut self, a: NodeId) -> Result<NodeId> {
        let mut out = self.value(a).clone();
        out.data.iter_mut().for_each(|v| *v = softplus(*v));
        self.push(Op::Softplus(a), out)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> Result<NodeId> {
        let mut out = self.value(a).clone();
        out.data.iter_mut().for_each(|v| *v += c);
        self.push(Op::AddScalar(a), out)
    }

    /// Dirichlet parameters (`n × C`) to opinions (`n × (C+1)`).
    pub fn to_opinion(&mut self, alpha: NodeId) -> Result<NodeId> {
        let va = self.value(alpha);
        let c = va.cols;
        let mut out = Tensor::zeros(va.rows, c + 1);
        for i in 0..va.rows {
            let row = va.row(i);
            let s: f64 = row.iter().sum();
            let o = &mut out.data[i * (c + 1)..(i + 1) * (c + 1)];
            for j in 0..c {
                o[j] = (row[j] - 1.0) / s;
            }
            o[c] = c as f64 / s;
        }
        self.push(Op::ToOpinion(alpha), out)
    }

    /// Row-wise Dempster combination of two opinion matrices.
    pub fn dempster(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.rows != vb.rows || va.cols != vb.cols {
            return Err(Error::Dimension {
                context: "dempster",
                expected: va.cols,
                actual: vb.cols,
            });
        }
        let c = va.cols - 1;
        let mut out = Tensor::zeros(va.rows, c + 1);
        for i in 0..va.rows {
            let (ra, rb) = (va.row(i), vb.row(i));
            let (beliefs, u, _) = dempster(&ra[..c], ra[c], &rb[..c], rb[c]);
            let o = &mut out.data[i * (c + 1)..(i + 1) * (c + 1)];
            o[..c].copy_from_slice(&beliefs);
            o[c] = u;
        }
        self.push(Op::Dempster(a, b), out)
    }

    /// Opinions back to Dirichlet parameters: `S = C/u`, `α = b S + 1`.
    pub fn opinion_to_alpha(&mut self, opinion: NodeId) -> Result<NodeId> {
        let vo = self.value(opinion);
        let c = vo.cols - 1;
        let mut out = Tensor::zeros(vo.rows, c);
        for i in 0..vo.rows {
            let r = vo.row(i);
            let s = c as f64 / r[c];
            for (o, b) in out.data[i * c..(i + 1) * c].iter_mut().zip(&r[..c]) {
                *o = b * s + 1.0;
            }
        }
        self.push(Op::OpinionToAlpha(opinion), out)
    }

    /// Mean over rows of `ICE + λ KL(α̃)`; produces a `1 × 1` node.
    pub fn evidential_loss(&mut self, alpha: NodeId, labels: &[usize], lambda: f64) -> Result<NodeId> {
        let va = self.value(alpha);
        if labels.len() != va.rows {
            return Err(Error::Dimension {
                context: "evidential_loss labels",
                expected: va.rows,
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= va.cols) {
            return Err(Error::InvalidLabel(format!("class {bad} with {} classes", va.cols)));
        }
        let total: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| view_loss_and_grad(va.row(i), y, lambda).0)
            .sum();
        let out = Tensor::new(1, 1, vec![total / va.rows as f64])?;
        self.push(
            Op::EvidentialLoss {
                alpha,
                labels: labels.to_vec(),
                lambda,
            },
            out,
        )
    }

    /// Sum of `1 × 1` nodes.
    pub fn sum(&mut self, terms: &[NodeId]) -> Result<NodeId> {
        let total = terms.iter().map(|&t| self.value(t).scalar()).sum();
        self.push(Op::Sum(terms.to_vec()), Tensor::new(1, 1, vec![total])?)
    }

    /// Back-propagates from a `1 × 1` output.
    pub fn backward(&self, output: NodeId) -> Gradients {
        let mut adjoints: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        adjoints[output.0] = Some(Tensor::new(1, 1, vec![1.0]).expect("1x1"));

        for index in (0..=output.0).rev() {
            let Some(grad) = adjoints[index].take() else {
                continue;
            };
            let node = &self.nodes[index];
            for (input, contribution) in self.local_vjp(node, &grad) {
                match &mut adjoints[input.0] {
                    Some(acc) => acc.add_assign(&contribution),
                    slot @ None => *slot = Some(contribution),
                }
            }
            adjoints[index] = Some(grad);
        }
        Gradients { adjoints }
    }

    /// Vector-Jacobian products of one node with respect to its inputs.
    fn local_vjp(&self, node: &Node, grad: &Tensor) -> Vec<(NodeId, Tensor)> {
        match &node.op {
            Op::Leaf => vec![],
            Op::MatMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                // dA = G Bᵀ, dB = Aᵀ G
                let mut da = Tensor::zeros(va.rows, va.cols);
                for i in 0..va.rows {
                    for k in 0..va.cols {
                        let mut acc = 0.0;
                        for j in 0..vb.cols {
                            acc += grad.data[i * vb.cols + j] * vb.data[k * vb.cols + j];
                        }
                        da.data[i * va.cols + k] = acc;
                    }
                }
                let mut db = Tensor::zeros(vb.rows, vb.cols);
                for i in 0..va.rows {
                    for k in 0..va.cols {
                        let aik = va.data[i * va.cols + k];
                        for j in 0..vb.cols {
                            db.data[k * vb.cols + j] += aik * grad.data[i * vb.cols + j];
                        }
                    }
                }
                vec![(*a, da), (*b, db)]
            }
            Op::AddBias(a, bias) => {
                let mut db = Tensor::zeros(1, grad.cols);
                for row in grad.data.chunks(grad.cols) {
                    for (d, g) in db.data.iter_mut().zip(row) {
                        *d += g;
                    }
                }
                vec![(*a, grad.clone()), (*bias, db)]
            }
            Op::Relu(a) => {
                let va = self.value(*a);
                let mut d = grad.clone();
                for (g, x) in d.data.iter_mut().zip(&va.data) {
                    if *x <= 0.0 {
                        *g = 0.0;
                    }
                }
                vec![(*a, d)]
            }
            Op::Softplus(a) => {
                let va = self.value(*a);
                let mut d = grad.clone();
                for (g, x) in d.data.iter_mut().zip(&va.data) {
                    *g *= sigmoid(*x);
                }
                vec![(*a, d)]
            }
            Op::AddScalar(a) => vec![(*a, grad.clone())],
            Op::ToOpinion(alpha) => {
                let va = self.value(*alpha);
                let c = va.cols;
                let out = &node.value;
                let mut d = Tensor::zeros(va.rows, c);
                for i in 0..va.rows {
                    let s: f64 = va.row(i).iter().sum();
                    let g = grad.row(i);
                    let o = out.row(i);
                    // Σ_c g_b,c b_c + g_u u
                    let dot: f64 = g.iter().zip(o).map(|(x, y)| x * y).sum();
                    for (dst, gj) in d.data[i * c..(i + 1) * c].iter_mut().zip(g) {
                        *dst = (gj - dot) / s;
                    }
                }
                vec![(*alpha, d)]
            }
            Op::Dempster(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let out = &node.value;
                let c = va.cols - 1;
                let mut da = Tensor::zeros(va.rows, c + 1);
                let mut db = Tensor::zeros(vb.rows, c + 1);
                for i in 0..va.rows {
                    let (ra, rb, ro, g) = (va.row(i), vb.row(i), out.row(i), grad.row(i));
                    let (b1, u1, b2, u2) = (&ra[..c], ra[c], &rb[..c], rb[c]);
                    let (_, _, n) = dempster(b1, u1, b2, u2);
                    // Outputs are m_k / N with N = Σ m_k, so
                    // ∂L/∂m_k = (g_k - Σ_j g_j o_j) / N.
                    let g_dot_o: f64 = g.iter().zip(ro).map(|(x, y)| x * y).sum();
                    let h_u = (g[c] - g_dot_o) / n;
                    let mut gu1 = h_u * u2;
                    let mut gu2 = h_u * u1;
                    let oa = &mut da.data[i * (c + 1)..(i + 1) * (c + 1)];
                    let ob = &mut db.data[i * (c + 1)..(i + 1) * (c + 1)];
                    for j in 0..c {
                        // m_j = b¹_j b²_j + b¹_j u² + b²_j u¹
                        let h = (g[j] - g_dot_o) / n;
                        oa[j] = h * (b2[j] + u2);
                        ob[j] = h * (b1[j] + u1);
                        gu1 += h * b2[j];
                        gu2 += h * b1[j];
                    }
                    oa[c] = gu1;
                    ob[c] = gu2;
                }
                vec![(*a, da), (*b, db)]
            }
            Op::OpinionToAlpha(opinion) => {
                let vo = self.value(*opinion);
                let c = vo.cols - 1;
                let mut d = Tensor::zeros(vo.rows, c + 1);
                for i in 0..vo.rows {
                    let r = vo.row(i);
                    let g = grad.row(i);
                    let u = r[c];
                    let s = c as f64 / u;
                    let mut gu = 0.0;
                    for j in 0..c {
                        d.data[i * (c + 1) + j] = g[j] * s;
                        gu -= g[j] * r[j] * s / u;
                    }
                    d.data[i * (c + 1) + c] = gu;
                }
                vec![(*opinion, d)]
            }
            Op::EvidentialLoss {
                alpha,
                labels,
                lambda,
            } => {
                let va = self.value(*alpha);
                let scale = grad.scalar() / va.rows as f64;
                let mut d = Tensor::zeros(va.rows, va.cols);
                for (i, &y) in labels.iter().enumerate() {
                    let (_, g) = view_loss_and_grad(va.row(i), y, *lambda);
                    for (dst, gv) in d.data[i * va.cols..(i + 1) * va.cols].iter_mut().zip(g) {
                        *dst = gv * scale;
                    }
                }
                vec![(*alpha, d)]
            }
            Op::Sum(terms) => terms.iter().map(|&t| (t, grad.clone())).collect(),
        }
    }
}
