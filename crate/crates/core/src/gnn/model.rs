use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};
use crate::gnn::layers::{gcn_layer_traced, mean_readout, Activation, LayerOutput};
use crate::gnn::{normalize_adjacency, Matrix, NormAdjacency};
use crate::graph::TableGraph;

pub const NUM_CLASSES: usize = ClassLabel::COUNT;

/// Two graph-convolution layers and a linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub w3: Matrix,
    pub b3: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        ModelParams {
            w1: Matrix::zeros(input_dim, hidden_dim),
            b1: vec![0.0; hidden_dim],
            w2: Matrix::zeros(hidden_dim, hidden_dim),
            b2: vec![0.0; hidden_dim],
            w3: Matrix::zeros(hidden_dim, NUM_CLASSES),
            b3: vec![0.0; NUM_CLASSES],
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        let mut p = ModelParams::zeros(input_dim, hidden_dim);
        for w in [&mut p.w1, &mut p.w2, &mut p.w3] {
            let a = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
            for v in w.as_mut_slice() {
                *v = rng.gen_range(-a..=a);
            }
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.cols()
    }

    /// Parameter blocks in a fixed order: W1, b1, W2, b2, W3, b3.
    pub fn blocks(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
            self.w3.as_slice(),
            &self.b3,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
            self.w3.as_mut_slice(),
            &mut self.b3,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn validate(&self) -> Result<()> {
        let (d, h) = (self.input_dim(), self.hidden_dim());
        let ok = self.b1.len() == h
            && self.w2.shape() == (h, h)
            && self.b2.len() == h
            && self.w3.shape() == (h, NUM_CLASSES)
            && self.b3.len() == NUM_CLASSES;
        if !ok {
            return Err(Error::Shape(format!(
                "inconsistent parameter shapes for d = {d}, h = {h}"
            )));
        }
        if !self.is_finite() {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            d: self.input_dim(),
            h: self.hidden_dim(),
            w1: self.w1.as_slice().to_vec(),
            b1: self.b1.clone(),
            w2: self.w2.as_slice().to_vec(),
            b2: self.b2.clone(),
            w3: self.w3.as_slice().to_vec(),
            b3: self.b3.clone(),
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self> {
        let p = ModelParams {
            w1: Matrix::from_vec(c.d, c.h, c.w1)?,
            b1: c.b1,
            w2: Matrix::from_vec(c.h, c.h, c.w2)?,
            b2: c.b2,
            w3: Matrix::from_vec(c.h, NUM_CLASSES, c.w3)?,
            b3: c.b3,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_checkpoint())?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        ModelParams::from_checkpoint(serde_json::from_slice(bytes)?)
    }
}

/// On-disk model: dimensions plus row-major weight arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub d: usize,
    pub h: usize,
    #[serde(rename = "W1")]
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    #[serde(rename = "W2")]
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    #[serde(rename = "W3")]
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

/// Intermediates of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub adjacency: NormAdjacency,
    pub layer1: LayerOutput,
    pub layer2: LayerOutput,
    pub readout: Vec<f64>,
    pub logits: [f64; NUM_CLASSES],
}

pub fn forward(g: &TableGraph, p: &ModelParams) -> Result<([f64; NUM_CLASSES], ForwardTrace)> {
    if g.feature_dim() != p.input_dim() {
        return Err(Error::Shape(format!(
            "graph `{}` has feature dim {}, model expects {}",
            g.record_id,
            g.feature_dim(),
            p.input_dim()
        )));
    }
    let adjacency = normalize_adjacency(&g.edges, g.n())?;
    let layer1 = gcn_layer_traced(&g.features, &adjacency, &p.w1, &p.b1, Activation::Relu)?;
    let layer2 = gcn_layer_traced(&layer1.output, &adjacency, &p.w2, &p.b2, Activation::Relu)?;
    let readout = mean_readout(&layer2.output)?;
    let mut logits = [0.0; NUM_CLASSES];
    for (c, l) in logits.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, r) in readout.iter().enumerate() {
            s += r * p.w3.get(k, c);
        }
        *l = s + p.b3[c];
    }
    Ok((
        logits,
        ForwardTrace {
            adjacency,
            layer1,
            layer2,
            readout,
            logits,
        },
    ))
}

pub fn softmax(logits: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = logits.map(|l| (l - max).exp());
    let z: f64 = out.iter().sum();
    for v in &mut out {
        *v /= z;
    }
    out
}

/// `-log softmax(logits)[label]`, computed via log-sum-exp.
pub fn cross_entropy(logits: &[f64; NUM_CLASSES], label: ClassLabel) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label.index()]
}

/// Cross-entropy loss and its exact gradient with respect to every parameter.
pub fn loss_and_grad(
    g: &TableGraph,
    p: &ModelParams,
    label: ClassLabel,
) -> Result<(f64, ModelParams)> {
    let (logits, trace) = forward(g, p)?;
    let loss = cross_entropy(&logits, label);
    let mut dlogits = softmax(&logits);
    dlogits[label.index()] -= 1.0;

    let h = p.hidden_dim();
    let n = g.n();
    let mut grads = ModelParams::zeros(p.input_dim(), h);

    // Linear head.
    for k in 0..h {
        for (c, d) in dlogits.iter().enumerate() {
            grads.w3.set(k, c, trace.readout[k] * d);
        }
    }
    grads.b3 = dlogits.to_vec();
    let dreadout: Vec<f64> = (0..h)
        .map(|k| (0..NUM_CLASSES).map(|c| p.w3.get(k, c) * dlogits[c]).sum())
        .collect();

    // Mean readout spreads the gradient evenly; ReLU gates it.
    let inv_n = 1.0 / n as f64;
    let mut dz2 = Matrix::zeros(n, h);
    for i in 0..n {
        let z = trace.layer2.pre_activation.row(i);
        for (k, d) in dz2.row_mut(i).iter_mut().enumerate() {
            *d = if z[k] > 0.0 { dreadout[k] * inv_n } else { 0.0 };
        }
    }
    grads.w2 = trace.layer2.aggregated.t_matmul(&dz2)?;
    grads.b2 = dz2.column_sums();

    // Â is symmetric, so Âᵀ·dZ2 = Â·dZ2.
    let dh1 = trace.adjacency.apply(&dz2)?.matmul_t(&p.w2)?;
    let mut dz1 = dh1;
    for i in 0..n {
        let z = trace.layer1.pre_activation.row(i).to_vec();
        for (d, zv) in dz1.row_mut(i).iter_mut().zip(z) {
            if zv <= 0.0 {
                *d = 0.0;
            }
        }
    }
    grads.w1 = trace.layer1.aggregated.t_matmul(&dz1)?;
    grads.b1 = dz1.column_sums();

    Ok((loss, grads))
}

/// Index of the largest logit; ties go to the lowest class index.
pub fn argmax(logits: &[f64; NUM_CLASSES]) -> ClassLabel {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if logits[c] > logits[best] {
            best = c;
        }
    }
    ClassLabel::ALL[best]
}

pub fn predict(g: &TableGraph, p: &ModelParams) -> Result<ClassLabel> {
    Ok(argmax(&forward(g, p)?.0))
}

/// Predicted class with its softmax probability.
pub fn predict_with_confidence(g: &TableGraph, p: &ModelParams) -> Result<(ClassLabel, f64)> {
    let (logits, _) = forward(g, p)?;
    let label = argmax(&logits);
    Ok((label, softmax(&logits)[label.index()]))
}
