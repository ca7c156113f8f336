//! Emotion selector: predicts the post emotion and a response-emotion vector
//! from parallel emotional and semantic encodings joined by a learned gate.

use rand::Rng;

use super::ModelConfig;
use crate::corpus::{EmotionVector, NUM_EMOTIONS, PAD};
use crate::error::{Error, Result};
use crate::numerics::{Graph, GruStack, ParamId, ParamStore, Scalar, Tensor, Var};

/// Self-attention pooling head: `a = softmax(v · tanh(W h_i))`.
#[derive(Clone, Debug)]
pub struct AttentionHead {
    pub w: ParamId,
    pub v: ParamId,
}

impl AttentionHead {
    fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        prefix: &str,
        cfg: &ModelConfig,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(AttentionHead {
            w: store.register_uniform(format!("{prefix}.w"), &[cfg.attn_dim, cfg.hidden_dim], cfg.init_scale, rng)?,
            v: store.register_uniform(format!("{prefix}.v"), &[cfg.attn_dim], cfg.init_scale, rng)?,
        })
    }
}

/// Affine layer `W x + b`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub(crate) fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        prefix: &str,
        out_dim: usize,
        in_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Linear {
            w: store.register_uniform(format!("{prefix}.w"), &[out_dim, in_dim], scale, rng)?,
            b: store.register_uniform(format!("{prefix}.b"), &[out_dim], scale, rng)?,
        })
    }

    pub fn apply<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var) -> Result<Var> {
        let (w, b) = (g.param(self.w), g.param(self.b));
        g.affine(w, x, b)
    }
}

#[derive(Clone, Debug)]
pub struct Selector {
    /// Sentiment-role embedding table (emotion encoder input).
    pub sentiment_embedding: ParamId,
    /// Semantic-role embedding table (semantics encoder input).
    pub semantic_embedding: ParamId,
    pub emotion_encoder: GruStack,
    pub semantic_encoder: GruStack,
    pub emotion_attention: AttentionHead,
    pub semantic_attention: AttentionHead,
    pub post_head: Linear,
    pub fusion_gate: Linear,
    pub prediction: Linear,
}

/// Pooled sequence representation and its attention weights.
#[derive(Clone, Copy, Debug)]
pub struct Pooled {
    pub state: Var,
    pub weights: Var,
}

#[derive(Clone, Copy, Debug)]
pub struct SelectorVars {
    pub post_emotion: Var,
    pub response_emotion: Var,
    pub emotion_pooled: Pooled,
    pub semantic_pooled: Pooled,
    pub fused: Var,
    pub gate: Var,
}

/// Plain values of a selector forward pass.
#[derive(Clone, Debug)]
pub struct SelectorOutput {
    pub post_emotion: EmotionVector,
    pub response_emotion: EmotionVector,
    pub emotion_state: Vec<f64>,
    pub semantic_state: Vec<f64>,
    pub gate: Vec<f64>,
    pub emotion_weights: Vec<f64>,
    pub semantic_weights: Vec<f64>,
}

/// Embeds `post`, runs `stack` over it and pools the top-layer states with
/// `head`. `PAD` positions are skipped by the recurrence and get zero weight.
pub fn encode_with_pooling<T: Scalar>(
    g: &mut Graph<'_, T>,
    table: ParamId,
    stack: &GruStack,
    head: &AttentionHead,
    post: &[u32],
) -> Result<Pooled> {
    let keep: Vec<bool> = post.iter().map(|&t| t != PAD).collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::invalid("encode_with_pooling", "empty sequence"));
    }
    let table = g.param(table);
    let inputs = post
        .iter()
        .map(|&t| g.row(table, t as usize))
        .collect::<Result<Vec<_>>>()?;
    let run = stack.run(g, &inputs, Some(&keep))?;
    let states = g.stack(&run.top)?;
    let w = g.param(head.w);
    let keys = run
        .top
        .iter()
        .map(|&h| g.matvec(w, h))
        .collect::<Result<Vec<_>>>()?;
    let keys = g.stack(&keys)?;
    let keys = g.tanh(keys);
    let v = g.param(head.v);
    let scores = g.matvec(keys, v)?;
    let weights = g.masked_softmax(scores, Some(&keep))?;
    let state = g.mat_t_vec(states, weights)?;
    Ok(Pooled { state, weights })
}

impl Selector {
    pub fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        cfg: &ModelConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let (v, e, h, s) = (cfg.vocab_size, cfg.emb_dim, cfg.hidden_dim, cfg.init_scale);
        Ok(Selector {
            sentiment_embedding: store.register_uniform("sel.sentiment_emb", &[v, e], s, rng)?,
            semantic_embedding: store.register_uniform("sel.semantic_emb", &[v, e], s, rng)?,
            emotion_encoder: GruStack::register(store, "sel.emo_enc", e, h, cfg.num_layers, s, rng)?,
            semantic_encoder: GruStack::register(store, "sel.sem_enc", e, h, cfg.num_layers, s, rng)?,
            emotion_attention: AttentionHead::register(store, "sel.emo_attn", cfg, rng)?,
            semantic_attention: AttentionHead::register(store, "sel.sem_attn", cfg, rng)?,
            post_head: Linear::register(store, "sel.post_head", NUM_EMOTIONS, h, s, rng)?,
            fusion_gate: Linear::register(store, "sel.fuse", h, 2 * h, s, rng)?,
            prediction: Linear::register(store, "sel.pred", NUM_EMOTIONS, h, s, rng)?,
        })
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        let mut ids = vec![self.sentiment_embedding, self.semantic_embedding];
        ids.extend(self.emotion_encoder.param_ids());
        ids.extend(self.semantic_encoder.param_ids());
        for head in [&self.emotion_attention, &self.semantic_attention] {
            ids.extend([head.w, head.v]);
        }
        for lin in [&self.post_head, &self.fusion_gate, &self.prediction] {
            ids.extend([lin.w, lin.b]);
        }
        ids
    }

    /// `ê_p = σ(W h̃_e + b)`.
    pub fn post_emotion_head<T: Scalar>(&self, g: &mut Graph<'_, T>, emotion_state: Var) -> Result<Var> {
        let logits = self.post_head.apply(g, emotion_state)?;
        Ok(g.sigmoid(logits))
    }

    /// `w = σ(W_f [h̃_s; h̃_e] + b_f)`, `h̃_es = w ⊙ tanh(h̃_s) + (1 - w) ⊙ tanh(h̃_e)`.
    /// Returns `(h̃_es, w)`.
    pub fn fuse<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        emotion_state: Var,
        semantic_state: Var,
    ) -> Result<(Var, Var)> {
        if g.shape(emotion_state) != g.shape(semantic_state) {
            return Err(Error::ShapeMismatch {
                op: "fuse",
                left: g.shape(emotion_state).to_vec(),
                right: g.shape(semantic_state).to_vec(),
            });
        }
        let both = g.concat(&[semantic_state, emotion_state])?;
        let gate = self.fusion_gate.apply(g, both)?;
        let gate = g.sigmoid(gate);
        let sem = g.tanh(semantic_state);
        let emo = g.tanh(emotion_state);
        let a = g.mul(gate, sem)?;
        let rest = g.one_minus(gate);
        let b = g.mul(rest, emo)?;
        Ok((g.add(a, b)?, gate))
    }

    /// `ê_r = σ(W_r h̃_es + b_r)`, deliberately not softmax-normalized.
    pub fn predict_response_emotion<T: Scalar>(&self, g: &mut Graph<'_, T>, fused: Var) -> Result<Var> {
        let logits = self.prediction.apply(g, fused)?;
        Ok(g.sigmoid(logits))
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<'_, T>, post: &[u32]) -> Result<SelectorVars> {
        let emotion_pooled = encode_with_pooling(
            g,
            self.sentiment_embedding,
            &self.emotion_encoder,
            &self.emotion_attention,
            post,
        )?;
        let semantic_pooled = encode_with_pooling(
            g,
            self.semantic_embedding,
            &self.semantic_encoder,
            &self.semantic_attention,
            post,
        )?;
        let post_emotion = self.post_emotion_head(g, emotion_pooled.state)?;
        let (fused, gate) = self.fuse(g, emotion_pooled.state, semantic_pooled.state)?;
        let response_emotion = self.predict_response_emotion(g, fused)?;
        Ok(SelectorVars {
            post_emotion,
            response_emotion,
            emotion_pooled,
            semantic_pooled,
            fused,
            gate,
        })
    }

    pub fn predict<T: Scalar>(&self, params: &ParamStore<T>, post: &[u32]) -> Result<SelectorOutput> {
        let mut g = Graph::inference(params);
        let vars = self.forward(&mut g, post)?;
        let f64s = |v: Var| g.value(v).data().iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        let emo = |v: Var| {
            let d = g.value(v).data();
            EmotionVector(std::array::from_fn(|i| d[i].as_f64() as f32))
        };
        Ok(SelectorOutput {
            post_emotion: emo(vars.post_emotion),
            response_emotion: emo(vars.response_emotion),
            emotion_state: f64s(vars.emotion_pooled.state),
            semantic_state: f64s(vars.semantic_pooled.state),
            gate: f64s(vars.gate),
            emotion_weights: f64s(vars.emotion_pooled.weights),
            semantic_weights: f64s(vars.semantic_pooled.weights),
        })
    }
}

/// Predictions are clamped to `[CLAMP, 1 - CLAMP]` before any log.
pub const CLAMP: f64 = 1e-7;

/// Cross-entropy of one sigmoid prediction against a multi-hot target.
///
/// Full binary cross-entropy summed over the six categories, or with
/// `literal` only the positive-label terms `-Σ e·log ê`.
pub fn emotion_cross_entropy<T: Scalar>(
    g: &mut Graph<'_, T>,
    predicted: Var,
    target: &EmotionVector,
    literal: bool,
) -> Result<Var> {
    if g.shape(predicted) != [NUM_EMOTIONS] {
        return Err(Error::ShapeMismatch {
            op: "selector_loss",
            left: g.shape(predicted).to_vec(),
            right: vec![NUM_EMOTIONS],
        });
    }
    let e = target.as_f64();
    let pos = g.input(Tensor::from_f64(&[NUM_EMOTIONS], &e)?);
    let p = g.clamp(predicted, CLAMP, 1.0 - CLAMP);
    let log_p = g.log(p)?;
    let mut total = g.mul(pos, log_p)?;
    if !literal {
        let neg = g.input(Tensor::from_f64(&[NUM_EMOTIONS], &e.map(|x| 1.0 - x))?);
        let q = g.one_minus(predicted);
        let q = g.clamp(q, CLAMP, 1.0 - CLAMP);
        let log_q = g.log(q)?;
        let t = g.mul(neg, log_q)?;
        total = g.add(total, t)?;
    }
    let s = g.sum(total);
    Ok(g.scale(s, -1.0))
}

/// `L_e = L_p + L_r`.
pub fn selector_loss<T: Scalar>(
    g: &mut Graph<'_, T>,
    post_pred: Var,
    post_target: &EmotionVector,
    response_pred: Var,
    response_target: &EmotionVector,
    literal: bool,
) -> Result<Var> {
    let lp = emotion_cross_entropy(g, post_pred, post_target, literal)?;
    let lr = emotion_cross_entropy(g, response_pred, response_target, literal)?;
    g.add(lp, lr)
}
