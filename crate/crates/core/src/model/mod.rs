//! The association model: a heterogeneous-graph encoder for diseases, a
//! structure MLP for drugs and `sigmoid(E_R · E_Dᵀ)` scoring.

mod encoder;
mod train;

pub use encoder::{forward, Forward, GraphTensors};
pub use train::{loss_and_gradients, positive_weight, train, TrainOutcome};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hetnet::{HeteroGraph, RelationKind};
use crate::numerics::{sigmoid, xavier_uniform, Matrix, NumericError, ParamSet, UnaryOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("training mask contains no positive pairs")]
    NoPositives,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Nonlinearity after every graph layer and hidden MLP layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Softplus,
    Elu,
    Relu,
    LeakyRelu,
    Tanh,
}

impl Activation {
    pub fn op(self) -> UnaryOp {
        match self {
            Activation::Softplus => UnaryOp::Softplus,
            Activation::Elu => UnaryOp::Elu,
            Activation::Relu => UnaryOp::Relu,
            Activation::LeakyRelu => UnaryOp::LeakyRelu { slope: 0.01 },
            Activation::Tanh => UnaryOp::Tanh,
        }
    }
}

/// How the `N_neg / N_pos` ratio enters the loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Weight on the positive-class term.
    #[default]
    PositiveWeight,
    /// Multiplier on the whole unweighted loss.
    ScaleLoss,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Width of the drug MLP hidden layers.
    pub hidden_dim: usize,
    /// Width of every graph layer and of both embeddings.
    pub embed_dim: usize,
    pub drug_dim: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub activation: Activation,
    pub heads: usize,
    pub attention_slope: f64,
    pub loss_mode: LossMode,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            embed_dim: 64,
            drug_dim: 300,
            dropout: 0.4,
            learning_rate: 0.005,
            epochs: 4000,
            activation: Activation::default(),
            heads: 1,
            attention_slope: 0.2,
            loss_mode: LossMode::default(),
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.hidden_dim == 0 || self.embed_dim == 0 || self.drug_dim == 0 {
            return bad("widths must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.heads != 1 {
            return bad("only single-head attention is supported");
        }
        Ok(())
    }
}

/// Parameters plus the shape facts needed to rebuild the forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub feature_width: usize,
    pub relations: Vec<RelationKind>,
    pub params: ParamSet,
    /// False when the state is still at its random initialization.
    pub trained: bool,
}

/// Drug-side embedding matrix `E_R` and disease-side `E_D`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrices {
    pub drugs: Matrix,
    pub diseases: Matrix,
}

#[derive(Serialize, Deserialize)]
struct StateHeader {
    config: ModelConfig,
    feature_width: usize,
    relations: Vec<RelationKind>,
    trained: bool,
}

impl ModelState {
    /// Xavier-initialized weights, zero biases and equal layer-attention
    /// logits, drawn from `config.seed`.
    pub fn init(config: &ModelConfig, graph: &HeteroGraph) -> Result<Self, ModelError> {
        config.validate()?;
        let relations: Vec<RelationKind> = graph.edges.keys().copied().collect();
        let feature_width = graph.feature_width();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (h, e) = (config.hidden_dim, config.embed_dim);
        let mut p = ParamSet::new();
        let dense = |p: &mut ParamSet, name: String, rows, cols, rng: &mut ChaCha8Rng| {
            p.insert(format!("{name}.w"), xavier_uniform(rows, cols, rng));
            p.insert(format!("{name}.b"), Matrix::zeros(1, cols));
        };
        dense(&mut p, "init".into(), feature_width, e, &mut rng);
        for layer in ["gcn1", "gcn2"] {
            dense(&mut p, format!("{layer}.self"), e, e, &mut rng);
            for r in &relations {
                p.insert(format!("{layer}.{}.w", r.key()), xavier_uniform(e, e, &mut rng));
            }
        }
        for r in &relations {
            dense(&mut p, format!("sub.{}.self", r.key()), e, e, &mut rng);
            p.insert(format!("sub.{}.rel.w", r.key()), xavier_uniform(e, e, &mut rng));
        }
        dense(&mut p, "gat".into(), e, e, &mut rng);
        p.insert("gat.a_src", xavier_uniform(e, 1, &mut rng));
        p.insert("gat.a_dst", xavier_uniform(e, 1, &mut rng));
        p.insert("layer_attention", Matrix::zeros(1, 4));
        dense(&mut p, "mlp1".into(), config.drug_dim, h, &mut rng);
        dense(&mut p, "mlp2".into(), h, h, &mut rng);
        dense(&mut p, "mlp3".into(), h, e, &mut rng);
        Ok(Self {
            config: config.clone(),
            feature_width,
            relations,
            params: p,
            trained: false,
        })
    }

    /// Inference-mode embeddings for every drug and disease.
    pub fn embeddings(
        &self,
        tensors: &GraphTensors,
        drug_vectors: &Matrix,
    ) -> Result<EmbeddingMatrices, ModelError> {
        let f = forward(self, tensors, drug_vectors, None)?;
        Ok(EmbeddingMatrices {
            drugs: f.tape.value(f.drug_embeddings).clone(),
            diseases: f.tape.value(f.disease_embeddings).clone(),
        })
    }

    /// Drug MLP alone, used for drugs outside the graph.
    pub fn drug_embeddings(&self, drug_vectors: &Matrix) -> Result<Matrix, ModelError> {
        drug_mlp(&self.params, &self.config, drug_vectors)
    }

    /// Softmaxed layer-attention weights.
    pub fn layer_attention_weights(&self) -> Vec<f64> {
        let mut w = self.params.get("layer_attention").expect("present").as_slice().to_vec();
        crate::numerics::softmax_in_place(&mut w);
        w
    }

    pub fn save(&self, dir: &Path) -> Result<(), ModelError> {
        let io = |path: &Path, e: std::io::Error| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let header = StateHeader {
            config: self.config.clone(),
            feature_width: self.feature_width,
            relations: self.relations.clone(),
            trained: self.trained,
        };
        let path = dir.join("model.json");
        let text = serde_json::to_string_pretty(&header).expect("serializable");
        std::fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
        self.params.save(&dir.join("params.txt"))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        let path = dir.join("model.json");
        let text = std::fs::read_to_string(&path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let header: StateHeader = serde_json::from_str(&text).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let params = ParamSet::load(&dir.join("params.txt"))?;
        Ok(Self {
            config: header.config,
            feature_width: header.feature_width,
            relations: header.relations,
            params,
            trained: header.trained,
        })
    }
}

/// Inference-mode drug MLP on plain matrices.
pub fn drug_mlp(params: &ParamSet, config: &ModelConfig, x: &Matrix) -> Result<Matrix, ModelError> {
    let act = config.activation.op();
    let layer = |x: &Matrix, name: &str, last: bool| -> Result<Matrix, ModelError> {
        let w = params.get(&format!("{name}.w")).ok_or_else(|| missing(name))?;
        let b = params.get(&format!("{name}.b")).ok_or_else(|| missing(name))?;
        let mut y = x.matmul(w)?;
        for r in 0..y.rows() {
            for (v, &bb) in y.row_mut(r).iter_mut().zip(b.as_slice()) {
                *v += bb;
                if !last {
                    *v = act.apply(*v);
                }
            }
        }
        Ok(y)
    };
    let h1 = layer(x, "mlp1", false)?;
    let h2 = layer(&h1, "mlp2", false)?;
    layer(&h2, "mlp3", true)
}

fn missing(name: &str) -> ModelError {
    ModelError::InvalidConfig(format!("missing parameter `{name}`"))
}

/// `sigmoid(E_R · E_Dᵀ)`.
pub fn score_matrix(drugs: &Matrix, diseases: &Matrix) -> Result<Matrix, ModelError> {
    Ok(drugs.matmul_t(diseases)?.map(sigmoid))
}
