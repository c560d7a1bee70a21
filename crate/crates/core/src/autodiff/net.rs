//! Dense evidential networks: rectifier hidden layers and a softplus output
//! that produces one non-negative evidence value per class.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tape::{matmul, softplus, GradTape, NodeId, Tensor};
use crate::data::MultiViewSample;
use crate::error::{Error, Result};
use crate::fusion::{combine_many, FusionResult};
use crate::opinion::{evidence_to_opinion, expected_probabilities, Evidence, Opinion, ProbVector};

/// Current checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub input_dim: usize,
    pub output_dim: usize,
    /// Row-major `input_dim × output_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn init(input_dim: usize, output_dim: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (input_dim + output_dim) as f64).sqrt();
        Self {
            input_dim,
            output_dim,
            weights: (0..input_dim * output_dim)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            bias: vec![0.0; output_dim],
        }
    }

    pub fn zeros(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            weights: vec![0.0; input_dim * output_dim],
            bias: vec![0.0; output_dim],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidentialNet {
    pub layers: Vec<Dense>,
}

impl EvidentialNet {
    /// `hidden` lists the widths of the rectifier layers; it may be empty.
    pub fn new(input_dim: usize, hidden: &[usize], num_classes: usize, rng: &mut impl Rng) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(num_classes);
        Self {
            layers: dims.windows(2).map(|w| Dense::init(w[0], w[1], rng)).collect(),
        }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("layer list"));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim != pair[1].input_dim {
                return Err(Error::Dimension {
                    context: "layer chain",
                    expected: pair[0].output_dim,
                    actual: pair[1].input_dim,
                });
            }
        }
        for l in &layers {
            if l.weights.len() != l.input_dim * l.output_dim || l.bias.len() != l.output_dim {
                return Err(Error::Dimension {
                    context: "layer weights",
                    expected: l.input_dim * l.output_dim,
                    actual: l.weights.len(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Evidence for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Evidence> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                context: "network input",
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut act = Tensor::new(1, x.len(), x.to_vec())?;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = Tensor::new(layer.input_dim, layer.output_dim, layer.weights.clone())?;
            act = matmul(&act, &w);
            for (v, b) in act.data.iter_mut().zip(&layer.bias) {
                *v += b;
                *v = if i == last { softplus(*v) } else { v.max(0.0) };
            }
            if act.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    index: i,
                    op: "dense layer",
                });
            }
        }
        Evidence::new(act.data)
    }

    /// Records the batch forward pass on `tape`. Returns the evidence node
    /// and the parameter leaves in `[W₀, b₀, W₁, b₁, …]` order.
    pub fn forward_tape(&self, tape: &mut GradTape, input: NodeId) -> Result<(NodeId, Vec<NodeId>)> {
        let mut params = Vec::with_capacity(2 * self.layers.len());
        let mut act = input;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = tape.leaf(Tensor::new(layer.input_dim, layer.output_dim, layer.weights.clone())?)?;
            let b = tape.leaf(Tensor::new(1, layer.output_dim, layer.bias.clone())?)?;
            params.push(w);
            params.push(b);
            let z = tape.matmul(act, w)?;
            let z = tape.add_bias(z, b)?;
            act = if i == last { tape.softplus(z)? } else { tape.relu(z)? };
        }
        Ok((act, params))
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
    }

    fn read_params(&mut self, src: &[f64]) -> usize {
        let mut at = 0;
        for l in &mut self.layers {
            let n = l.weights.len();
            l.weights.copy_from_slice(&src[at..at + n]);
            at += n;
            let n = l.bias.len();
            l.bias.copy_from_slice(&src[at..at + n]);
            at += n;
        }
        at
    }
}

/// Layer sizes of a multi-view model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelShape {
    pub num_classes: usize,
    /// Input width of each local view.
    pub local_dims: Vec<usize>,
    /// Input width of the global view, if there is one.
    pub global_dim: Option<usize>,
    pub hidden: Vec<usize>,
}

/// One evidential network per local view plus an optional global one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub num_classes: usize,
    pub locals: Vec<EvidentialNet>,
    pub global: Option<EvidentialNet>,
}

/// Per-view opinions and their fusion for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub view_opinions: Vec<Opinion>,
    pub fusion: FusionResult,
    pub probs: ProbVector,
}

impl Model {
    /// Each network draws its initial weights from its own ChaCha stream, so
    /// adding a view leaves the other views' initialization unchanged.
    pub fn new(shape: &ModelShape, seed: u64) -> Result<Self> {
        if shape.num_classes < 2 {
            return Err(Error::InvalidParameter {
                name: "num_classes",
                reason: "need at least 2".into(),
            });
        }
        if shape.local_dims.is_empty() && shape.global_dim.is_none() {
            return Err(Error::Empty("view list"));
        }
        let net = |dim: usize, stream: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            EvidentialNet::new(dim, &shape.hidden, shape.num_classes, &mut rng)
        };
        Ok(Self {
            num_classes: shape.num_classes,
            locals: shape
                .local_dims
                .iter()
                .enumerate()
                .map(|(k, &d)| net(d, 100 + k as u64))
                .collect(),
            global: shape.global_dim.map(|d| net(d, 99)),
        })
    }

    /// Local networks followed by the global one.
    pub fn nets(&self) -> impl Iterator<Item = &EvidentialNet> {
        self.locals.iter().chain(self.global.as_ref())
    }

    pub fn num_nets(&self) -> usize {
        self.locals.len() + usize::from(self.global.is_some())
    }

    pub fn param_count(&self) -> usize {
        self.nets().map(EvidentialNet::param_count).sum()
    }

    /// Flat parameter vector in [`Model::nets`] order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for n in self.nets() {
            n.write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension {
                context: "parameter vector",
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut at = 0;
        for n in self.locals.iter_mut().chain(self.global.as_mut()) {
            at += n.read_params(&params[at..]);
        }
        Ok(())
    }

    pub(crate) fn check_sample(&self, s: &MultiViewSample) -> Result<()> {
        if s.views.len() != self.locals.len() {
            return Err(Error::Dimension {
                context: "number of local views",
                expected: self.locals.len(),
                actual: s.views.len(),
            });
        }
        if s.global.is_some() != self.global.is_some() {
            return Err(Error::Malformed(
                "sample and model disagree on the presence of a global view".into(),
            ));
        }
        if s.label >= self.num_classes {
            return Err(Error::InvalidLabel(format!(
                "class {} with {} classes",
                s.label, self.num_classes
            )));
        }
        Ok(())
    }

    /// Feature vectors of a sample in [`Model::nets`] order.
    pub(crate) fn inputs<'a>(&self, s: &'a MultiViewSample) -> impl Iterator<Item = &'a [f64]> {
        s.views.iter().map(Vec::as_slice).chain(s.global.as_deref())
    }

    /// Opinions of every view fused in order `locals…, global`.
    pub fn predict(&self, s: &MultiViewSample) -> Result<Prediction> {
        self.check_sample(s)?;
        let view_opinions = self
            .nets()
            .zip(self.inputs(s))
            .map(|(net, x)| net.forward(x).map(|e| evidence_to_opinion(&e)))
            .collect::<Result<Vec<_>>>()?;
        let fusion = combine_many(&view_opinions)?;
        let probs = expected_probabilities(&fusion.combined.to_dirichlet());
        Ok(Prediction {
            view_opinions,
            fusion,
            probs,
        })
    }
}

/// Versioned JSON checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub model: Model,
}

impl Checkpoint {
    pub fn new(model: Model) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            model,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported checkpoint version {}",
                c.version
            )));
        }
        for net in c.model.nets() {
            EvidentialNet::from_layers(net.layers.clone())?;
            if net.num_classes() != c.model.num_classes {
                return Err(Error::ClassMismatch {
                    expected: c.model.num_classes,
                    actual: net.num_classes(),
                });
            }
        }
        Ok(c)
    }
}
