//! Graph convolutional classifier with hand-written backpropagation.
//!
//! `logits = mean(relu(Â relu(Â X W1 + b1) W2 + b2)) W3 + b3` where `Â` is the
//! symmetrically normalized adjacency with self-loops. All arithmetic is
//! `f64`.

mod adjacency;
pub mod layers;
mod matrix;
mod model;

pub use adjacency::{normalize_adjacency, NormAdjacency};
pub use layers::{gcn_layer, mean_readout, Activation};
pub use matrix::Matrix;
pub use model::{
    argmax, cross_entropy, forward, loss_and_grad, predict, predict_with_confidence, softmax,
    Checkpoint, ForwardTrace, ModelParams, NUM_CLASSES,
};
