use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{forward, GraphTensors, LossMode, ModelConfig, ModelError, ModelState};
use crate::hetnet::HeteroGraph;
use crate::numerics::{AdamConfig, AdamState, Matrix};

/// `N_neg / N_pos` counted inside the mask.
pub fn positive_weight(labels: &Matrix, mask: &Matrix) -> Result<f64, ModelError> {
    let (mut pos, mut neg) = (0usize, 0usize);
    for (&y, &m) in labels.as_slice().iter().zip(mask.as_slice()) {
        if m != 0.0 {
            if y != 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    if pos == 0 {
        return Err(ModelError::NoPositives);
    }
    Ok(neg as f64 / pos as f64)
}

/// Weighted loss and the gradient of every parameter, in parameter-set
/// order. Dropout is active only when `dropout_rng` is given.
pub fn loss_and_gradients(
    state: &ModelState,
    tensors: &GraphTensors,
    drug_vectors: &Matrix,
    labels: &Arc<Matrix>,
    mask: &Arc<Matrix>,
    dropout_rng: Option<&mut dyn rand::RngCore>,
) -> Result<(f64, Vec<Matrix>), ModelError> {
    let ratio = positive_weight(labels, mask)?;
    let (pos_weight, scale) = match state.config.loss_mode {
        LossMode::PositiveWeight => (ratio, 1.0),
        LossMode::ScaleLoss => (1.0, ratio),
    };
    let mut f = forward(state, tensors, drug_vectors, dropout_rng)?;
    let loss = f
        .tape
        .weighted_bce(f.logits, labels.clone(), mask.clone(), pos_weight, scale)?;
    let value = f.tape.value(loss).item();
    let mut grads = f.tape.backward(loss)?;
    let out = f
        .params
        .iter()
        .zip(state.params.values())
        .map(|(&v, m)| grads.take(v).unwrap_or_else(|| Matrix::zeros(m.rows(), m.cols())))
        .collect();
    Ok((value, out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub state: ModelState,
    /// Training loss per epoch, measured before that epoch's update.
    pub losses: Vec<f64>,
    pub best_epoch: usize,
    pub best_loss: f64,
}

/// Full-batch Adam for `config.epochs` epochs, keeping the parameters with
/// the lowest training loss seen.
pub fn train(
    graph: &HeteroGraph,
    drug_vectors: &Matrix,
    labels: &Matrix,
    mask: &Matrix,
    config: &ModelConfig,
) -> Result<TrainOutcome, ModelError> {
    let mut state = ModelState::init(config, graph)?;
    let tensors = GraphTensors::new(graph);
    let labels = Arc::new(labels.clone());
    let mask = Arc::new(mask.clone());
    positive_weight(&labels, &mask)?;
    let mut adam = AdamState::new(
        AdamConfig {
            lr: config.learning_rate,
            ..AdamConfig::default()
        },
        state.params.values(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_d50f);
    let mut losses = Vec::with_capacity(config.epochs);
    let mut best = (f64::INFINITY, 0usize, state.params.clone());
    for epoch in 0..config.epochs {
        let (loss, grads) =
            loss_and_gradients(&state, &tensors, drug_vectors, &labels, &mask, Some(&mut rng))?;
        if !loss.is_finite() {
            return Err(crate::numerics::NumericError::NonFinite(format!("loss at epoch {epoch}")).into());
        }
        losses.push(loss);
        if loss < best.0 {
            best = (loss, epoch, state.params.clone());
        }
        if epoch % 100 == 0 {
            log::debug!("epoch {epoch}: loss {loss:.6}");
        }
        adam.step(state.params.values_mut(), &grads)?;
    }
    let (best_loss, best_epoch, params) = best;
    if config.epochs > 0 {
        state.params = params;
        state.trained = true;
    }
    Ok(TrainOutcome {
        state,
        losses,
        best_epoch,
        best_loss,
    })
}
