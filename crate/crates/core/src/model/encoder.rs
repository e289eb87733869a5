use std::sync::Arc;

use super::{missing, ModelError, ModelState};
use crate::hetnet::{HeteroGraph, NodeClass, RelationKind};
use crate::numerics::{dropout_mask, CsrMatrix, Neighborhoods, ParamSet, Tape, Var};

/// Graph-derived constants of the forward pass: sparse features, one
/// normalized adjacency per relation and the attention neighbourhoods.
#[derive(Clone, Debug)]
pub struct GraphTensors {
    pub num_nodes: usize,
    pub n_drugs: usize,
    pub n_diseases: usize,
    pub disease_offset: usize,
    pub features: Arc<CsrMatrix>,
    pub adjacency: Vec<(RelationKind, Arc<CsrMatrix>)>,
    pub neighborhoods: Arc<Neighborhoods>,
}

impl GraphTensors {
    /// Every relation is treated as undirected; the normalized adjacency is
    /// `D^-1/2 A D^-1/2` over weighted edges without self-loops. Attention
    /// runs over the union of all relations plus a self-loop per node.
    pub fn new(graph: &HeteroGraph) -> Self {
        let n = graph.num_nodes();
        let mut lists: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let mut adjacency = Vec::new();
        for &kind in graph.edges.keys() {
            let mut triplets = Vec::new();
            for (u, v, w) in graph.global_edges(kind) {
                if u == v {
                    continue;
                }
                triplets.push((u, v, w));
                triplets.push((v, u, w));
                lists[u].push(v);
                lists[v].push(u);
            }
            let raw = CsrMatrix::from_triplets(n, n, triplets).expect("indices in range");
            let degree: Vec<f64> = (0..n).map(|r| raw.row_entries(r).map(|(_, w)| w).sum()).collect();
            let normalized: Vec<_> = raw
                .triplets()
                .map(|(r, c, w)| (r, c, w / (degree[r] * degree[c]).sqrt()))
                .collect();
            let norm = CsrMatrix::from_triplets(n, n, normalized).expect("indices in range");
            adjacency.push((kind, Arc::new(norm)));
        }
        Self {
            num_nodes: n,
            n_drugs: graph.n_drugs(),
            n_diseases: graph.n_diseases(),
            disease_offset: graph.offset(NodeClass::Disease),
            features: Arc::new(graph.features.clone()),
            adjacency,
            neighborhoods: Arc::new(Neighborhoods::from_lists(lists)),
        }
    }
}

/// A recorded forward pass. `params[i]` is the leaf for the i-th entry of
/// the state's parameter set.
pub struct Forward {
    pub tape: Tape,
    pub params: Vec<Var>,
    pub drug_embeddings: Var,
    pub disease_embeddings: Var,
    pub logits: Var,
    pub layer_weights: Var,
    pub attention: Var,
}

struct Builder<'a> {
    tape: Tape,
    set: &'a ParamSet,
    leaves: Vec<Var>,
}

impl Builder<'_> {
    fn p(&self, name: &str) -> Result<Var, ModelError> {
        self.set
            .position(name)
            .map(|i| self.leaves[i])
            .ok_or_else(|| missing(name))
    }

    fn affine(&mut self, x: Var, name: &str) -> Result<Var, ModelError> {
        let (w, b) = (self.p(&format!("{name}.w"))?, self.p(&format!("{name}.b"))?);
        let y = self.tape.matmul(x, w)?;
        Ok(self.tape.add_row(y, b)?)
    }
}

/// Records the full forward pass. Dropout is applied to the hidden layers of
/// the drug MLP only when `dropout_rng` is given.
pub fn forward(
    state: &ModelState,
    tensors: &GraphTensors,
    drug_vectors: &crate::numerics::Matrix,
    mut dropout_rng: Option<&mut dyn rand::RngCore>,
) -> Result<Forward, ModelError> {
    let config = &state.config;
    if drug_vectors.rows() != tensors.n_drugs || drug_vectors.cols() != config.drug_dim {
        return Err(crate::numerics::NumericError::ShapeMismatch {
            op: "drug vectors",
            left: drug_vectors.shape(),
            right: (tensors.n_drugs, config.drug_dim),
        }
        .into());
    }
    if tensors.features.cols() != state.feature_width {
        return Err(ModelError::InvalidConfig(format!(
            "graph feature width {} but model expects {}",
            tensors.features.cols(),
            state.feature_width
        )));
    }
    let act = config.activation.op();
    let mut tape = Tape::new();
    let leaves = state.params.values().iter().map(|m| tape.leaf(m.clone())).collect();
    let mut b = Builder {
        tape,
        set: &state.params,
        leaves,
    };

    // Disease encoder.
    let (w0, b0) = (b.p("init.w")?, b.p("init.b")?);
    let x0 = b.tape.sparse_matmul(tensors.features.clone(), w0)?;
    let x0 = b.tape.add_row(x0, b0)?;
    let h0 = b.tape.unary(x0, act);

    let gcn = |b: &mut Builder, h: Var, layer: &str| -> Result<Var, ModelError> {
        let mut terms = vec![b.affine(h, &format!("{layer}.self"))?];
        for (kind, adj) in &tensors.adjacency {
            let w = b.p(&format!("{layer}.{}.w", kind.key()))?;
            let msg = b.tape.sparse_matmul(adj.clone(), h)?;
            terms.push(b.tape.matmul(msg, w)?);
        }
        let z = b.tape.add_all(&terms)?;
        Ok(b.tape.unary(z, act))
    };
    let h1 = gcn(&mut b, h0, "gcn1")?;
    let h2 = gcn(&mut b, h1, "gcn2")?;

    let mut subnets = Vec::new();
    for (kind, adj) in &tensors.adjacency {
        let own = b.affine(h2, &format!("sub.{}.self", kind.key()))?;
        let w = b.p(&format!("sub.{}.rel.w", kind.key()))?;
        let msg = b.tape.sparse_matmul(adj.clone(), h2)?;
        let msg = b.tape.matmul(msg, w)?;
        let z = b.tape.add(own, msg)?;
        subnets.push(b.tape.unary(z, act));
    }
    let h3 = if subnets.is_empty() {
        h2
    } else {
        b.tape.add_all(&subnets)?
    };

    let wh = b.tape.matmul(h3, b.p("gat.w")?)?;
    let src = b.tape.matmul(wh, b.p("gat.a_src")?)?;
    let dst = b.tape.matmul(wh, b.p("gat.a_dst")?)?;
    let attention = b.tape.edge_attention(
        wh,
        src,
        dst,
        tensors.neighborhoods.clone(),
        config.attention_slope,
    )?;
    let z = b.tape.add_row(attention, b.p("gat.b")?)?;
    let h4 = b.tape.unary(z, act);

    let layer_weights = b.tape.softmax(b.p("layer_attention")?);
    let mut fused = Vec::new();
    for (i, &h) in [h1, h2, h3, h4].iter().enumerate() {
        fused.push(b.tape.scale_by_entry(h, layer_weights, i)?);
    }
    let fused = b.tape.add_all(&fused)?;
    let disease_embeddings = b
        .tape
        .row_slice(fused, tensors.disease_offset, tensors.n_diseases)?;

    // Drug MLP.
    let x = b.tape.leaf(drug_vectors.clone());
    let mut h = x;
    for (i, name) in ["mlp1", "mlp2", "mlp3"].iter().enumerate() {
        if i > 0 {
            if let Some(rng) = dropout_rng.as_deref_mut() {
                if config.dropout > 0.0 {
                    let shape = b.tape.value(h).shape();
                    let mask = dropout_mask(shape.0, shape.1, config.dropout, rng);
                    h = b.tape.mul_const(h, mask)?;
                }
            }
        }
        h = b.affine(h, name)?;
        if i < 2 {
            h = b.tape.unary(h, act);
        }
    }
    let drug_embeddings = h;
    let logits = b.tape.matmul_t(drug_embeddings, disease_embeddings)?;
    Ok(Forward {
        tape: b.tape,
        params: b.leaves,
        drug_embeddings,
        disease_embeddings,
        logits,
        layer_weights,
        attention,
    })
}
