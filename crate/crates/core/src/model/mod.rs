//! Selector + generator composition, model modes and the combined objective.

mod generator;
mod selector;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use generator::{DecoderState, EmotionPath, Encoded, Generator, StepOutput};
pub use selector::{
    emotion_cross_entropy, encode_with_pooling, selector_loss, AttentionHead, Linear, Pooled, Selector,
    SelectorOutput, SelectorVars, CLAMP,
};

use crate::corpus::{ConversationPair, Emotion, EmotionVector, NUM_EMOTIONS};
use crate::error::{Error, Result};
use crate::numerics::{Graph, ParamStore, Scalar, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModelMode {
    /// Plain attention seq2seq; no emotion path.
    Seq2seq,
    /// Generator driven by a designated one-hot emotion instead of the selector.
    Seq2seqEmb,
    /// Selector output injected softly into the generator.
    #[default]
    Eacm,
}

impl ModelMode {
    pub fn name(self) -> &'static str {
        match self {
            ModelMode::Seq2seq => "seq2seq",
            ModelMode::Seq2seqEmb => "seq2seq_emb",
            ModelMode::Eacm => "eacm",
        }
    }

    pub fn has_emotion_path(self) -> bool {
        self != ModelMode::Seq2seq
    }
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq2seq" => Ok(ModelMode::Seq2seq),
            "seq2seq_emb" => Ok(ModelMode::Seq2seqEmb),
            "eacm" => Ok(ModelMode::Eacm),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected seq2seq, seq2seq_emb or eacm)"
            ))),
        }
    }
}

/// Architecture dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub mode: ModelMode,
    pub vocab_size: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    pub attn_dim: usize,
    /// Width of `V_e`.
    pub emo_dim: usize,
    pub num_layers: usize,
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mode: ModelMode::Eacm,
            vocab_size: 200,
            emb_dim: 32,
            hidden_dim: 64,
            attn_dim: 64,
            emo_dim: 32,
            num_layers: 2,
            init_scale: 0.08,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("emb_dim", self.emb_dim),
            ("hidden_dim", self.hidden_dim),
            ("attn_dim", self.attn_dim),
            ("emo_dim", self.emo_dim),
            ("num_layers", self.num_layers),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.vocab_size <= crate::corpus::EOS as usize {
            return Err(Error::Config("vocab_size must exceed the reserved tokens".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("init_scale must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Graph handles of one example's objective.
#[derive(Clone, Copy, Debug)]
pub struct LossVars {
    pub total: Var,
    /// `L_e`; absent in seq2seq mode.
    pub selector: Option<Var>,
    pub seq2seq: Var,
}

/// `α·L_e + (1 − α)·L_seq2seq`.
pub fn combined_loss(selector: f64, seq2seq: f64, alpha: f64) -> f64 {
    alpha * selector + (1.0 - alpha) * seq2seq
}

pub fn combined_loss_var<T: Scalar>(g: &mut Graph<'_, T>, selector: Var, seq2seq: Var, alpha: f64) -> Result<Var> {
    let a = g.scale(selector, alpha);
    let b = g.scale(seq2seq, 1.0 - alpha);
    g.add(a, b)
}

/// Loss options shared by training and gradient checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub alpha: f64,
    pub literal: bool,
}

impl Default for Objective {
    fn default() -> Self {
        Objective {
            alpha: 0.5,
            literal: false,
        }
    }
}

/// One generated reply with the selector's view of the post.
#[derive(Clone, Debug)]
pub struct Reply {
    pub tokens: Vec<u32>,
    pub post_emotion: EmotionVector,
    pub response_emotion: EmotionVector,
}

/// Full model: architecture plus its parameter registry.
#[derive(Clone, Debug)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub selector: Selector,
    pub generator: Generator,
    pub params: ParamStore<T>,
}

impl<T: Scalar> Model<T> {
    /// Registers every parameter in a fixed order from a seeded stream.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let selector = Selector::register(&mut params, &config, &mut rng)?;
        let generator = Generator::register(&mut params, &config, config.mode.has_emotion_path(), &mut rng)?;
        Ok(Model {
            config,
            selector,
            generator,
            params,
        })
    }

    pub fn mode(&self) -> ModelMode {
        self.config.mode
    }

    /// Same architecture and values in another precision.
    pub fn cast<U: Scalar>(&self) -> Model<U> {
        Model {
            config: self.config.clone(),
            selector: self.selector.clone(),
            generator: self.generator.clone(),
            params: self.params.cast(),
        }
    }

    /// Builds the objective for one pair on `g`.
    ///
    /// In seq2seq mode only the generator loss is used. In seq2seq_emb mode the
    /// generator sees the one-hot gold response emotion while the selector is
    /// trained alongside on `L_e`. In eacm mode `ê_r` feeds `V_e` directly.
    pub fn example_loss(&self, g: &mut Graph<'_, T>, pair: &ConversationPair, obj: Objective) -> Result<LossVars> {
        let target = pair.target();
        match self.mode() {
            ModelMode::Seq2seq => {
                let seq2seq = self.generator.seq2seq_loss(g, &pair.post, &target, None)?;
                Ok(LossVars {
                    total: seq2seq,
                    selector: None,
                    seq2seq,
                })
            }
            mode => {
                let sel = self.selector.forward(g, &pair.post)?;
                let le = selector_loss(
                    g,
                    sel.post_emotion,
                    &pair.post_emotion(),
                    sel.response_emotion,
                    &pair.response_emotion(),
                    obj.literal,
                )?;
                let er = if mode == ModelMode::Eacm {
                    sel.response_emotion
                } else {
                    let one_hot = EmotionVector::one_hot(pair.response_labels.0).as_f64();
                    g.input(Tensor::from_f64(&[NUM_EMOTIONS], &one_hot)?)
                };
                let ve = self.generator.emotion_vector(g, er)?;
                let seq2seq = self.generator.seq2seq_loss(g, &pair.post, &target, Some(ve))?;
                let total = combined_loss_var(g, le, seq2seq, obj.alpha)?;
                Ok(LossVars {
                    total,
                    selector: Some(le),
                    seq2seq,
                })
            }
        }
    }

    /// `V_e` for a given `ê_r`, evaluated outside any graph.
    fn emotion_values(&self, er: &EmotionVector) -> Result<Vec<T>> {
        let mut g = Graph::inference(&self.params);
        let x = g.input(Tensor::from_f64(&[NUM_EMOTIONS], &er.as_f64())?);
        let ve = self.generator.emotion_vector(&mut g, x)?;
        Ok(g.value(ve).data().to_vec())
    }

    /// Greedy reply. `designated` overrides the emotion fed to the generator;
    /// without it eacm mode uses `ê_r` and seq2seq_emb mode the one-hot of
    /// its argmax.
    pub fn reply(&self, post: &[u32], designated: Option<Emotion>, max_len: usize) -> Result<Reply> {
        if max_len == 0 {
            return Err(Error::invalid("reply", "max_len must be at least 1"));
        }
        let sel = self.selector.predict(&self.params, post)?;
        let emotion = match (self.mode(), designated) {
            (ModelMode::Seq2seq, _) => None,
            (_, Some(e)) => Some(EmotionVector::one_hot(e)),
            (ModelMode::Seq2seqEmb, None) => Some(EmotionVector::one_hot(sel.response_emotion.argmax())),
            (ModelMode::Eacm, None) => Some(sel.response_emotion),
        };
        let ve = emotion.map(|e| self.emotion_values(&e)).transpose()?;
        let tokens = self.generator.greedy_decode(&self.params, post, ve.as_deref(), max_len)?;
        Ok(Reply {
            tokens,
            post_emotion: sel.post_emotion,
            response_emotion: sel.response_emotion,
        })
    }

    /// Copies compatible parameters from `source` (typically a seq2seq
    /// pretrain). Equal names and shapes are copied verbatim. A decoder
    /// input matrix widened for the emotion path receives the source in its
    /// leading columns. The emotion embedding is zeroed so the warm-started
    /// model initially reproduces the source's generator loss. Parameters
    /// absent from `source` keep their fresh initialization.
    pub fn warm_start(&mut self, source: &ParamStore<T>) -> Result<()> {
        let mut mismatched = Vec::new();
        let emo_embedding = self.generator.emotion.as_ref().map(|p| p.embedding);
        for (_, p) in self.params.iter() {
            let Some(src) = source.by_name(&p.name) else { continue };
            let (dst_shape, src_shape) = (p.value.shape(), src.value.shape());
            let widened = dst_shape.len() == 2
                && src_shape.len() == 2
                && dst_shape[0] == src_shape[0]
                && dst_shape[1] > src_shape[1]
                && is_decoder_input_matrix(&p.name);
            if dst_shape != src_shape && !widened {
                mismatched.push(p.name.clone());
            }
        }
        if !mismatched.is_empty() {
            return Err(Error::ParamMismatch(mismatched));
        }
        for p in self.params.iter_mut() {
            let Some(src) = source.by_name(&p.name) else { continue };
            if p.value.shape() == src.value.shape() {
                p.value = src.value.clone();
            } else {
                let (rows, dst_cols) = (p.value.rows(), p.value.cols());
                let src_cols = src.value.cols();
                let data = p.value.data_mut();
                for r in 0..rows {
                    data[r * dst_cols..r * dst_cols + src_cols].copy_from_slice(src.value.row(r));
                }
            }
        }
        if let Some(id) = emo_embedding {
            self.params.get_mut(id).value.fill(T::zero());
        }
        Ok(())
    }
}

/// First-layer decoder input weights `gen.dec.l0.w_{z,r,h}`.
fn is_decoder_input_matrix(name: &str) -> bool {
    matches!(name, "gen.dec.l0.w_z" | "gen.dec.l0.w_r" | "gen.dec.l0.w_h")
}
