//! Substructure embeddings learned with skip-gram and negative sampling, and
//! per-molecule vectors obtained by summing them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::MolSentence;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("sentence is empty")]
    EmptySentence,
    #[error("corrupt embedding file: {0}")]
    CorruptFile(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Vocabulary entry: a substructure identifier or the reserved unknown token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Token {
    Unk,
    Id(u32),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Unk => f.write_str("UNK"),
            Token::Id(h) => write!(f, "{h}"),
        }
    }
}

impl std::str::FromStr for Token {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "UNK" {
            Ok(Token::Unk)
        } else {
            s.parse().map(Token::Id).map_err(|_| ())
        }
    }
}

/// Token vocabulary with frequencies. `UNK` is always at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    counts: Vec<u64>,
    index: HashMap<Token, usize>,
}

impl Vocabulary {
    fn from_parts(tokens: Vec<Token>, counts: Vec<u64>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Self {
            tokens,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, token: Token) -> Option<u64> {
        self.index.get(&token).map(|&i| self.counts[i])
    }

    pub fn lookup(&self, token: Token) -> Option<usize> {
        self.index.get(&token).copied()
    }

    /// Index of `hash`, falling back to `UNK`.
    pub fn resolve(&self, hash: u32) -> usize {
        self.index.get(&Token::Id(hash)).copied().unwrap_or(0)
    }
}

/// Sentences as vocabulary indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub vocab: Vocabulary,
    pub sentences: Vec<Vec<usize>>,
}

/// Counts tokens and replaces those seen fewer than `min_count` times by `UNK`.
///
/// Vocabulary order: `UNK`, then by descending count, ties by identifier.
pub fn build_corpus(sentences: &[MolSentence], min_count: u64) -> Result<Corpus, EmbedError> {
    if sentences.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let mut freq: HashMap<u32, u64> = HashMap::new();
    for s in sentences {
        for h in s.hashes() {
            *freq.entry(h).or_default() += 1;
        }
    }
    let mut kept: Vec<(u32, u64)> = freq
        .iter()
        .filter(|&(_, &c)| c >= min_count)
        .map(|(&h, &c)| (h, c))
        .collect();
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let unk_count: u64 = freq.values().filter(|&&c| c < min_count).sum();
    let mut tokens = vec![Token::Unk];
    let mut counts = vec![unk_count];
    for (h, c) in kept {
        tokens.push(Token::Id(h));
        counts.push(c);
    }
    let vocab = Vocabulary::from_parts(tokens, counts);
    let sentences = sentences
        .iter()
        .map(|s| s.hashes().map(|h| vocab.resolve(h)).collect())
        .collect();
    Ok(Corpus { vocab, sentences })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate; decays linearly to `1e-4` of this value.
    pub learning_rate: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 20,
            learning_rate: 0.025,
            min_count: 3,
            seed: 0,
        }
    }
}

/// Learned token vectors, stored in single precision.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: Vocabulary,
    vectors: Vec<f32>,
}

/// Loss of one skip-gram step:
/// `−ln σ(u_ctx·v) − Σ_k ln σ(−u_k·v)` for center vector `v`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    let pos = crate::numerics::dot(center, context);
    let mut loss = crate::numerics::softplus(-pos);
    for neg in negatives {
        loss += crate::numerics::softplus(crate::numerics::dot(center, neg));
    }
    loss
}

/// Gradients of [`sgns_loss`]: `(∂/∂center, ∂/∂context, ∂/∂negative_k)`.
pub fn sgns_gradients(
    center: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let sig = crate::numerics::sigmoid;
    let g_pos = sig(crate::numerics::dot(center, context)) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let d_context: Vec<f64> = center.iter().map(|v| g_pos * v).collect();
    let mut d_negs = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let g = sig(crate::numerics::dot(center, neg));
        for (d, u) in d_center.iter_mut().zip(neg.iter()) {
            *d += g * u;
        }
        d_negs.push(center.iter().map(|v| g * v).collect());
    }
    (d_center, d_context, d_negs)
}

/// Initial input vectors: `U(−0.5/dim, 0.5/dim)` per component.
pub fn initial_table(corpus: &Corpus, config: &SkipGramConfig) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (input, _) = init_weights(corpus.vocab.len(), config.dim, &mut rng);
    to_table(&corpus.vocab, config.dim, &input)
}

fn init_weights(vocab: usize, dim: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 / dim as f64;
    let input = (0..vocab * dim).map(|_| rng.random_range(-half..half)).collect();
    (input, vec![0.0; vocab * dim])
}

fn to_table(vocab: &Vocabulary, dim: usize, input: &[f64]) -> EmbeddingTable {
    EmbeddingTable {
        dim,
        vocab: vocab.clone(),
        vectors: input.iter().map(|&v| v as f32).collect(),
    }
}

/// Skip-gram with negative sampling over the corpus. Single-threaded and
/// bit-reproducible for a fixed seed.
///
/// Every token within `window` positions of a center token is a positive
/// context; negatives are drawn from the unigram distribution raised to 0.75.
pub fn train_skipgram(corpus: &Corpus, config: &SkipGramConfig) -> EmbeddingTable {
    let dim = config.dim;
    let vocab_len = corpus.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut input, mut output) = init_weights(vocab_len, dim, &mut rng);

    let weights: Vec<f64> = corpus
        .vocab
        .counts()
        .iter()
        .map(|&c| (c as f64).powf(0.75))
        .collect();
    let sampler = WeightedIndex::new(&weights).ok();

    let total_steps = (config.epochs * corpus.sentences.len()).max(1) as f64;
    let mut step = 0usize;
    let mut negs: Vec<usize> = Vec::with_capacity(config.negatives);
    let mut neuron = vec![0.0; dim];
    for _ in 0..config.epochs {
        for sentence in &corpus.sentences {
            let lr = (config.learning_rate * (1.0 - step as f64 / total_steps))
                .max(config.learning_rate * 1e-4);
            step += 1;
            for (i, &center) in sentence.iter().enumerate() {
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window + 1).min(sentence.len());
                for (j, &ctx) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negs.clear();
                    if let Some(s) = &sampler {
                        for _ in 0..config.negatives {
                            let k = s.sample(&mut rng);
                            if k != ctx {
                                negs.push(k);
                            }
                        }
                    }
                    neuron.iter_mut().for_each(|x| *x = 0.0);
                    let c_off = center * dim;
                    let targets = std::iter::once((ctx, 1.0)).chain(negs.iter().map(|&k| (k, 0.0)));
                    for (target, label) in targets {
                        let t_off = target * dim;
                        let score = crate::numerics::dot(
                            &input[c_off..c_off + dim],
                            &output[t_off..t_off + dim],
                        );
                        // descent direction: (label − σ(score)) = −∂loss/∂score
                        let g = (label - crate::numerics::sigmoid(score)) * lr;
                        for d in 0..dim {
                            neuron[d] += g * output[t_off + d];
                            output[t_off + d] += g * input[c_off + d];
                        }
                    }
                    for d in 0..dim {
                        input[c_off + d] += neuron[d];
                    }
                }
            }
        }
    }
    to_table(&corpus.vocab, dim, &input)
}

/// How token vectors are pooled into a molecule vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Sum,
    Mean,
}

/// A molecule's vector and how its tokens resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct MolVector {
    pub values: Vec<f64>,
    pub tokens: usize,
    pub unknown: usize,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector_at(&self, index: usize) -> &[f32] {
        &self.vectors[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector(&self, token: Token) -> Option<&[f32]> {
        self.vocab.lookup(token).map(|i| self.vector_at(i))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\t{}", self.dim, self.vocab.len());
        for (i, (&tok, &count)) in self.vocab.tokens.iter().zip(&self.vocab.counts).enumerate() {
            let comps: Vec<String> = self.vector_at(i).iter().map(|v| format!("{v:.8e}")).collect();
            let _ = writeln!(out, "{tok}\t{count}\t{}", comps.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EmbedError> {
        let corrupt = |m: String| EmbedError::CorruptFile(m);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| corrupt("empty file".into()))?;
        let (dim, size) = header
            .split_once('\t')
            .and_then(|(d, n)| Some((d.parse::<usize>().ok()?, n.parse::<usize>().ok()?)))
            .ok_or_else(|| corrupt(format!("bad header `{header}`")))?;
        let mut tokens = Vec::with_capacity(size);
        let mut counts = Vec::with_capacity(size);
        let mut vectors = Vec::with_capacity(size * dim);
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            let mut parts = line.splitn(3, '\t');
            let (Some(tok), Some(count), Some(vals)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(corrupt(format!("line {line_no}: expected 3 fields")));
            };
            let tok: Token = tok
                .parse()
                .map_err(|_| corrupt(format!("line {line_no}: bad token `{tok}`")))?;
            let count: u64 = count
                .parse()
                .map_err(|_| corrupt(format!("line {line_no}: bad count")))?;
            let comps = vals
                .split(' ')
                .filter(|s| !s.is_empty())
                .map(str::parse::<f32>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| corrupt(format!("line {line_no}: {e}")))?;
            if comps.len() != dim {
                return Err(EmbedError::DimensionMismatch {
                    line: line_no,
                    expected: dim,
                    found: comps.len(),
                });
            }
            tokens.push(tok);
            counts.push(count);
            vectors.extend(comps);
        }
        if tokens.len() != size {
            return Err(corrupt(format!(
                "header declares {size} tokens, found {}",
                tokens.len()
            )));
        }
        if tokens.first() != Some(&Token::Unk) {
            return Err(corrupt("UNK must be the first token".into()));
        }
        Ok(Self {
            dim,
            vocab: Vocabulary::from_parts(tokens, counts),
            vectors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        std::fs::write(path, self.to_text()).map_err(|e| EmbedError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let text = std::fs::read_to_string(path).map_err(|e| EmbedError::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

/// Pools the vectors of a sentence's tokens; unknown tokens use `UNK`'s vector.
pub fn molecule_vector(
    sentence: &MolSentence,
    table: &EmbeddingTable,
    pooling: Pooling,
) -> Result<MolVector, EmbedError> {
    if sentence.is_empty() {
        return Err(EmbedError::EmptySentence);
    }
    let mut values = vec![0.0; table.dim];
    let mut unknown = 0;
    for h in sentence.hashes() {
        let idx = table.vocab.resolve(h);
        if idx == 0 {
            unknown += 1;
        }
        for (v, &x) in values.iter_mut().zip(table.vector_at(idx)) {
            *v += f64::from(x);
        }
    }
    if pooling == Pooling::Mean {
        let n = sentence.len() as f64;
        values.iter_mut().for_each(|v| *v /= n);
    }
    Ok(MolVector {
        values,
        tokens: sentence.len(),
        unknown,
    })
}
