use crate::error::{Error, Result};
use crate::gnn::{Matrix, NormAdjacency};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

/// Output of one graph convolution, keeping the pieces backprop needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    /// `Â · H`
    pub aggregated: Matrix,
    /// `Â · H · W + b`
    pub pre_activation: Matrix,
    pub output: Matrix,
}

/// `act(Â · H · W + 1 bᵀ)`.
pub fn gcn_layer(
    h: &Matrix,
    adj: &NormAdjacency,
    w: &Matrix,
    b: &[f64],
    activation: Activation,
) -> Result<Matrix> {
    Ok(gcn_layer_traced(h, adj, w, b, activation)?.output)
}

pub fn gcn_layer_traced(
    h: &Matrix,
    adj: &NormAdjacency,
    w: &Matrix,
    b: &[f64],
    activation: Activation,
) -> Result<LayerOutput> {
    if h.cols() != w.rows() {
        return Err(Error::Shape(format!(
            "layer input has {} features, weight expects {}",
            h.cols(),
            w.rows()
        )));
    }
    if b.len() != w.cols() {
        return Err(Error::Shape(format!(
            "bias has {} entries, weight has {} outputs",
            b.len(),
            w.cols()
        )));
    }
    let aggregated = adj.apply(h)?;
    let mut pre_activation = aggregated.matmul(w)?;
    for r in 0..pre_activation.rows() {
        for (v, bias) in pre_activation.row_mut(r).iter_mut().zip(b) {
            *v += bias;
        }
    }
    let mut output = pre_activation.clone();
    for v in output.as_mut_slice() {
        *v = activation.apply(*v);
    }
    Ok(LayerOutput {
        aggregated,
        pre_activation,
        output,
    })
}

/// Column-wise mean over nodes, summed in ascending node order.
pub fn mean_readout(h: &Matrix) -> Result<Vec<f64>> {
    if h.rows() == 0 {
        return Err(Error::Shape("mean readout of an empty graph".into()));
    }
    let n = h.rows() as f64;
    Ok(h.column_sums().into_iter().map(|s| s / n).collect())
}
