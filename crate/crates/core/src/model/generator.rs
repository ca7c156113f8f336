//! Emotion-biased seq2seq response generator.
//!
//! The response-emotion vector `ê_r` is embedded as `V_e = W_emo ê_r` and
//! injected twice: as an extra attention bias `W_3 V_e` and concatenated to
//! every decoder input embedding. Without an emotion path the generator is a
//! plain GRU seq2seq model with additive attention.

use rand::Rng;

use super::selector::Linear;
use super::ModelConfig;
use crate::corpus::{EOS, NUM_EMOTIONS, PAD, SOS};
use crate::error::{Error, Result};
use crate::numerics::{Graph, GruStack, ParamId, ParamStore, Scalar, Tensor, Var};

#[derive(Clone, Debug)]
pub struct EmotionPath {
    /// `W_emo: [d_emo, 6]`.
    pub embedding: ParamId,
    /// `W_3: [attn, d_emo]`.
    pub attention_bias: ParamId,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub encoder_embedding: ParamId,
    pub encoder: GruStack,
    pub decoder_embedding: ParamId,
    pub decoder: GruStack,
    /// `W_1: [attn, hidden]`, applied to encoder states.
    pub attn_keys: ParamId,
    /// `W_2: [attn, hidden]`, applied to the decoder state.
    pub attn_query: ParamId,
    /// `v: [attn]`.
    pub attn_v: ParamId,
    /// `W_4: [hidden, 2·hidden]`.
    pub combine: ParamId,
    pub output: Linear,
    pub emotion: Option<EmotionPath>,
}

/// Encoder results reused at every decoding step.
#[derive(Clone, Debug)]
pub struct Encoded {
    /// `[T, hidden]`.
    pub states: Var,
    /// `W_1 h_i` for every position, `[T, attn]`.
    pub keys: Var,
    pub mask: Vec<bool>,
    /// Final state of each encoder layer.
    pub finals: Vec<Var>,
    pub top_final: Var,
}

#[derive(Clone, Debug)]
pub struct DecoderState {
    /// Per-layer GRU states; the top entry is the raw `s_t`.
    pub layers: Vec<Var>,
    /// `s'_t = W_4 [s_t; c_t]`.
    pub combined: Var,
    pub step: usize,
}

/// One decoding step's outputs.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: DecoderState,
    pub logits: Var,
    pub attention: Var,
}

impl Generator {
    pub fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        cfg: &ModelConfig,
        emotion: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let (v, e, h, a, s) = (cfg.vocab_size, cfg.emb_dim, cfg.hidden_dim, cfg.attn_dim, cfg.init_scale);
        let dec_in = if emotion { e + cfg.emo_dim } else { e };
        let encoder_embedding = store.register_uniform("gen.enc_emb", &[v, e], s, rng)?;
        let encoder = GruStack::register(store, "gen.enc", e, h, cfg.num_layers, s, rng)?;
        let decoder_embedding = store.register_uniform("gen.dec_emb", &[v, e], s, rng)?;
        let decoder = GruStack::register(store, "gen.dec", dec_in, h, cfg.num_layers, s, rng)?;
        let attn_keys = store.register_uniform("gen.attn.w1", &[a, h], s, rng)?;
        let attn_query = store.register_uniform("gen.attn.w2", &[a, h], s, rng)?;
        let attn_v = store.register_uniform("gen.attn.v", &[a], s, rng)?;
        let combine = store.register_uniform("gen.combine.w4", &[h, 2 * h], s, rng)?;
        let output = Linear::register(store, "gen.out", v, h, s, rng)?;
        let emotion = if emotion {
            Some(EmotionPath {
                attention_bias: store.register_uniform("gen.attn.w3", &[a, cfg.emo_dim], s, rng)?,
                embedding: store.register_uniform("gen.emo_emb", &[cfg.emo_dim, NUM_EMOTIONS], s, rng)?,
            })
        } else {
            None
        };
        Ok(Generator {
            encoder_embedding,
            encoder,
            decoder_embedding,
            decoder,
            attn_keys,
            attn_query,
            attn_v,
            combine,
            output,
            emotion,
        })
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        let mut ids = vec![self.encoder_embedding];
        ids.extend(self.encoder.param_ids());
        ids.push(self.decoder_embedding);
        ids.extend(self.decoder.param_ids());
        ids.extend([self.attn_keys, self.attn_query, self.attn_v, self.combine]);
        ids.extend([self.output.w, self.output.b]);
        if let Some(p) = &self.emotion {
            ids.extend([p.attention_bias, p.embedding]);
        }
        ids
    }

    pub fn vocab_size<T: Scalar>(&self, params: &ParamStore<T>) -> usize {
        params.value(self.output.b).len()
    }

    /// `V_e = W_emo ê_r`.
    pub fn emotion_vector<T: Scalar>(&self, g: &mut Graph<'_, T>, response_emotion: Var) -> Result<Var> {
        let path = self
            .emotion
            .as_ref()
            .ok_or_else(|| Error::invalid("emotion_vector", "generator has no emotion path"))?;
        let w = g.param(path.embedding);
        g.matvec(w, response_emotion)
    }

    pub fn encode<T: Scalar>(&self, g: &mut Graph<'_, T>, post: &[u32]) -> Result<Encoded> {
        let mask: Vec<bool> = post.iter().map(|&t| t != PAD).collect();
        if !mask.iter().any(|&k| k) {
            return Err(Error::invalid("encode", "empty post"));
        }
        let table = g.param(self.encoder_embedding);
        let inputs = post
            .iter()
            .map(|&t| g.row(table, t as usize))
            .collect::<Result<Vec<_>>>()?;
        let run = self.encoder.run(g, &inputs, Some(&mask))?;
        let states = g.stack(&run.top)?;
        let w1 = g.param(self.attn_keys);
        let keys = run
            .top
            .iter()
            .map(|&h| g.matvec(w1, h))
            .collect::<Result<Vec<_>>>()?;
        let keys = g.stack(&keys)?;
        let top_final = *run.finals.last().expect("at least one layer");
        Ok(Encoded {
            states,
            keys,
            mask,
            finals: run.finals,
            top_final,
        })
    }

    /// `u_i = v · tanh(W_1 h_i + W_2 s_t [+ W_3 V_e])`, softmax over unmasked
    /// positions, context `c_t = Σ a_i h_i`. Returns `(c_t, a)`.
    pub fn biased_attention<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        enc: &Encoded,
        state: Var,
        emotion: Option<Var>,
    ) -> Result<(Var, Var)> {
        let w2 = g.param(self.attn_query);
        let mut query = g.matvec(w2, state)?;
        if let Some(ve) = emotion {
            let path = self
                .emotion
                .as_ref()
                .ok_or_else(|| Error::invalid("biased_attention", "generator has no emotion path"))?;
            let w3 = g.param(path.attention_bias);
            let bias = g.matvec(w3, ve)?;
            query = g.add(query, bias)?;
        }
        let pre = g.add_row(enc.keys, query)?;
        let act = g.tanh(pre);
        let v = g.param(self.attn_v);
        let scores = g.matvec(act, v)?;
        let weights = g.masked_softmax(scores, Some(&enc.mask))?;
        let context = g.mat_t_vec(enc.states, weights)?;
        Ok((context, weights))
    }

    fn combine_state<T: Scalar>(&self, g: &mut Graph<'_, T>, s: Var, c: Var) -> Result<Var> {
        let w4 = g.param(self.combine);
        let sc = g.concat(&[s, c])?;
        g.matvec(w4, sc)
    }

    /// Lower decoder layers start from the matching encoder final states;
    /// the top layer starts from `s'_0 = W_4 [h_T; 0]`.
    pub fn initial_state<T: Scalar>(&self, g: &mut Graph<'_, T>, enc: &Encoded) -> Result<DecoderState> {
        let h = self.decoder.hidden_dim();
        let zero = g.input(Tensor::zeros(&[h]));
        let combined = self.combine_state(g, enc.top_final, zero)?;
        Ok(DecoderState {
            layers: enc.finals.clone(),
            combined,
            step: 0,
        })
    }

    /// `s_t = GRU(s'_{t-1}, [y_{t-1}; V_e])`, attention from `s_t`,
    /// `s'_t = W_4 [s_t; c_t]`, logits from `s'_t`.
    pub fn decoder_step<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        state: &DecoderState,
        prev_token: u32,
        emotion: Option<Var>,
        enc: &Encoded,
    ) -> Result<StepOutput> {
        let table = g.param(self.decoder_embedding);
        let vocab = g.shape(table)[0];
        if prev_token as usize >= vocab {
            return Err(Error::invalid(
                "decoder_step",
                format!("token id {prev_token} out of range for vocabulary of {vocab}"),
            ));
        }
        if emotion.is_some() != self.emotion.is_some() {
            return Err(Error::invalid(
                "decoder_step",
                "emotion vector must be given exactly when the generator has an emotion path",
            ));
        }
        let y = g.row(table, prev_token as usize)?;
        let mut below = match emotion {
            Some(ve) => g.concat(&[y, ve])?,
            None => y,
        };
        let top = self.decoder.layers.len() - 1;
        let mut layers = Vec::with_capacity(top + 1);
        for (k, cell) in self.decoder.layers.iter().enumerate() {
            let prev = if k == top { state.combined } else { state.layers[k] };
            let bound = cell.bind(g);
            below = bound.step(g, below, prev)?;
            layers.push(below);
        }
        let (context, attention) = self.biased_attention(g, enc, below, emotion)?;
        let combined = self.combine_state(g, below, context)?;
        let logits = self.output.apply(g, combined)?;
        Ok(StepOutput {
            state: DecoderState {
                layers,
                combined,
                step: state.step + 1,
            },
            logits,
            attention,
        })
    }

    /// Teacher-forced mean per-token negative log-likelihood of `target`
    /// (which must end with `EOS`).
    pub fn seq2seq_loss<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        post: &[u32],
        target: &[u32],
        emotion: Option<Var>,
    ) -> Result<Var> {
        if target.is_empty() {
            return Err(Error::invalid("seq2seq_loss", "empty response"));
        }
        if target.last() != Some(&EOS) {
            return Err(Error::invalid("seq2seq_loss", "response must end with EOS"));
        }
        let enc = self.encode(g, post)?;
        let mut state = self.initial_state(g, &enc)?;
        let mut prev = SOS;
        let mut terms = Vec::with_capacity(target.len());
        for &gold in target {
            let out = self.decoder_step(g, &state, prev, emotion, &enc)?;
            let logp = g.log_softmax(out.logits)?;
            terms.push(g.pick(logp, gold as usize)?);
            state = out.state;
            prev = gold;
        }
        let all = g.concat(&terms)?;
        let total = g.sum(all);
        Ok(g.scale(total, -1.0 / target.len() as f64))
    }

    /// Argmax decoding from `SOS` until `EOS` (kept in the output) or
    /// `max_len` tokens. Ties go to the lowest token id.
    pub fn greedy_decode<T: Scalar>(
        &self,
        params: &ParamStore<T>,
        post: &[u32],
        emotion: Option<&[T]>,
        max_len: usize,
    ) -> Result<Vec<u32>> {
        let mut g = Graph::inference(params);
        let ve = emotion.map(|e| g.input(Tensor::vector(e.to_vec())));
        let enc = self.encode(&mut g, post)?;
        let mut state = self.initial_state(&mut g, &enc)?;
        let mut prev = SOS;
        let mut out = Vec::new();
        while out.len() < max_len {
            let step = self.decoder_step(&mut g, &state, prev, ve, &enc)?;
            let logits = g.value(step.logits).data();
            let mut best = 0;
            for (i, &l) in logits.iter().enumerate() {
                if l > logits[best] {
                    best = i;
                }
            }
            let tok = best as u32;
            out.push(tok);
            if tok == EOS {
                break;
            }
            state = step.state;
            prev = tok;
        }
        Ok(out)
    }
}
