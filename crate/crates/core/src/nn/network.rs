use std::fmt;

use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::batchnorm::{BatchNormState, Mode};
use super::dense::{DenseLayer, LayerTape};
use crate::error::{Error, Result};
use crate::numerics::{glorot_init, Matrix, RngStream};

/// Shape and layer options of a feed-forward classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub activation: ActivationKind,
    /// Binarize every layer's weights (hidden layers and the output head).
    pub binary_weights: bool,
    /// Insert batchnorm between each hidden linear map and its activation.
    pub batchnorm: bool,
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.classes < 2 || self.hidden.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "bad architecture: input {} hidden {:?} classes {}",
                self.input_dim, self.hidden, self.classes
            )));
        }
        self.activation.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapKind {
    PostBn,
    PostAct,
    Softmax,
}

/// An instrumentation point. Hidden layers are numbered from 0; the softmax
/// head carries `layer == hidden.len()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TapId {
    pub layer: usize,
    pub kind: TapKind,
}

impl fmt::Display for TapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TapKind::PostBn => write!(f, "L{}.bn", self.layer + 1),
            TapKind::PostAct => write!(f, "L{}.act", self.layer + 1),
            TapKind::Softmax => f.write_str("softmax"),
        }
    }
}

/// Parses the display form; the softmax tap's layer index is not encoded in
/// it, so `"softmax"` yields `layer == usize::MAX` for callers to resolve.
impl std::str::FromStr for TapId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "softmax" {
            return Ok(TapId {
                layer: usize::MAX,
                kind: TapKind::Softmax,
            });
        }
        let bad = || {
            Error::InvalidArgument(format!(
                "bad tap {s:?}, expected L<n>.bn, L<n>.act or softmax"
            ))
        };
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let (n, kind) = rest.split_once('.').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let kind = match kind {
            "bn" => TapKind::PostBn,
            "act" => TapKind::PostAct,
            _ => return Err(bad()),
        };
        Ok(TapId { layer: n - 1, kind })
    }
}

/// Forward-pass record of a whole network.
#[derive(Clone, Debug)]
pub struct Tape {
    pub mode: Mode,
    pub layers: Vec<LayerTape>,
    pub head: LayerTape,
    pub probs: Matrix,
}

impl Tape {
    pub fn logits(&self) -> &Matrix {
        &self.head.pre_activation
    }

    pub fn tap(&self, id: TapId) -> Option<&Matrix> {
        match id.kind {
            TapKind::Softmax if id.layer == self.layers.len() => Some(&self.probs),
            TapKind::PostAct => self.layers.get(id.layer).map(|t| &t.post_activation),
            TapKind::PostBn => self
                .layers
                .get(id.layer)
                .filter(|t| t.batchnorm.is_some())
                .map(|t| &t.pre_activation),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Network {
    pub architecture: Architecture,
    pub layers: Vec<DenseLayer>,
    pub head: DenseLayer,
    #[serde(skip)]
    tape: Option<Tape>,
}

impl Network {
    /// Builds a network with Glorot-uniform latent weights drawn from `rng`.
    pub fn new(architecture: Architecture, rng: &mut RngStream) -> Result<Self> {
        architecture.validate()?;
        let mut layers = Vec::with_capacity(architecture.hidden.len());
        let mut fan_in = architecture.input_dim;
        for &width in &architecture.hidden {
            layers.push(DenseLayer {
                latent_weights: glorot_init(rng, fan_in, width),
                binarize_weights: architecture.binary_weights,
                activation: architecture.activation,
                batchnorm: architecture.batchnorm.then(|| BatchNormState::new(width)),
            });
            fan_in = width;
        }
        let head = DenseLayer {
            latent_weights: glorot_init(rng, fan_in, architecture.classes),
            binarize_weights: architecture.binary_weights,
            activation: ActivationKind::Identity,
            batchnorm: None,
        };
        Ok(Self {
            architecture,
            layers,
            head,
            tape: None,
        })
    }

    /// Every tap this network exposes, from the first hidden layer to the head.
    pub fn taps(&self) -> Vec<TapId> {
        let mut taps = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.batchnorm.is_some() {
                taps.push(TapId {
                    layer: i,
                    kind: TapKind::PostBn,
                });
            }
            taps.push(TapId {
                layer: i,
                kind: TapKind::PostAct,
            });
        }
        taps.push(TapId {
            layer: self.layers.len(),
            kind: TapKind::Softmax,
        });
        taps
    }

    /// All trainable weight matrices, hidden layers first, head last.
    pub fn weight_layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.layers.iter().chain(std::iter::once(&self.head))
    }

    pub fn weight_layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.layers
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
    }

    pub fn tape(&self) -> Option<&Tape> {
        self.tape.as_ref()
    }

    pub fn clear_tape(&mut self) {
        self.tape = None;
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.architecture.input_dim {
            return Err(Error::shape(
                "network_forward",
                format!(
                    "batch width {} but input dimension {}",
                    batch.cols(),
                    self.architecture.input_dim
                ),
            ));
        }
        Ok(())
    }

    /// Full forward pass. Train mode updates batchnorm running statistics and
    /// always keeps the tape (backward needs it); eval mode keeps it only when
    /// `record_tape` is set.
    pub fn forward(&mut self, batch: &Matrix, mode: Mode, record_tape: bool) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut tapes = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        for layer in &mut self.layers {
            let (tape, stats) = layer.forward(&current, mode)?;
            if let (Some(bn), Some(stats)) = (layer.batchnorm.as_mut(), stats) {
                bn.update_running(&stats);
            }
            current = tape.post_activation.clone();
            tapes.push(tape);
        }
        let (head, _) = self.head.forward(&current, mode)?;
        let probs = softmax(&head.pre_activation);
        if mode == Mode::Train || record_tape {
            self.tape = Some(Tape {
                mode,
                layers: tapes,
                head,
                probs: probs.clone(),
            });
        } else {
            self.tape = None;
        }
        Ok(probs)
    }

    /// Eval-mode forward pass with every tap recorded; leaves `self` untouched.
    pub fn infer(&self, batch: &Matrix) -> Result<Tape> {
        self.check_input(batch)?;
        let mut tapes = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        for layer in &self.layers {
            let (tape, _) = layer.forward(&current, Mode::Eval)?;
            current = tape.post_activation.clone();
            tapes.push(tape);
        }
        let (head, _) = self.head.forward(&current, Mode::Eval)?;
        let probs = softmax(&head.pre_activation);
        Ok(Tape {
            mode: Mode::Eval,
            layers: tapes,
            head,
            probs,
        })
    }

    /// Eval-mode logits without recording anything.
    pub fn logits(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut current = batch.clone();
        for layer in &self.layers {
            current = layer.infer(&current)?;
        }
        self.head.dense_forward(&current)
    }

    /// Gradient of the mean cross-entropy of the last forward pass with
    /// respect to every layer's latent weights (hidden layers first, head last).
    pub fn backward(&self, labels: &[usize]) -> Result<Vec<Matrix>> {
        let tape = self.tape.as_ref().ok_or_else(|| {
            Error::State("backward called without a recorded forward pass".into())
        })?;
        let (n, classes) = tape.probs.shape();
        check_labels(labels, n, classes)?;

        let mut upstream = tape.probs.clone();
        for (r, &y) in labels.iter().enumerate() {
            let row = upstream.row_mut(r);
            row[y] -= 1.0;
            row.iter_mut().for_each(|v| *v /= n as f64);
        }

        let mut grads = vec![Matrix::zeros(1, 1); self.layers.len() + 1];
        let (input_grad, head_grad) =
            self.head
                .backward(&tape.head, &upstream, !self.layers.is_empty())?;
        grads[self.layers.len()] = head_grad;
        let mut upstream = input_grad;
        for (i, (layer, lt)) in self.layers.iter().zip(&tape.layers).enumerate().rev() {
            let up = upstream
                .take()
                .ok_or_else(|| Error::State("missing upstream gradient".into()))?;
            let (input_grad, weight_grad) = layer.backward(lt, &up, i > 0)?;
            grads[i] = weight_grad;
            upstream = input_grad;
        }
        Ok(grads)
    }
}

fn check_labels(labels: &[usize], rows: usize, classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::shape(
            "labels",
            format!("{} labels for {rows} rows", labels.len()),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    Ok(())
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

/// Mean cross-entropy (nats) and accuracy of `logits` against `labels`.
///
/// Ties in the argmax resolve to the lowest class index.
pub fn loss_and_accuracy(logits: &Matrix, labels: &[usize]) -> Result<(f64, f64)> {
    let (n, classes) = logits.shape();
    check_labels(labels, n, classes)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (row, &y) in logits.iter_rows().zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[y];
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        if best == y {
            correct += 1;
        }
    }
    Ok((loss / n as f64, correct as f64 / n as f64))
}
