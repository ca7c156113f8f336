//! Whole-model gradient check of the combined objective in 64-bit mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ConversationPair, Emotion, NUM_EMOTIONS, RESERVED};
use crate::error::{Error, Result};
use crate::kv;
use crate::model::{Model, ModelConfig, ModelMode, Objective};
use crate::numerics::{GradCheck, GradCheckReport, Graph, ParamStore};

/// Tiny-model settings. Defaults: vocab 20, hidden 8, embeddings 8,
/// sequences of at most 5 tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub mode: ModelMode,
    pub vocab_size: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    pub attn_dim: usize,
    pub num_layers: usize,
    /// Uniform init range. Larger than the training default so that every
    /// gradient entry clears the relative-error floor.
    pub init_scale: f64,
    pub max_len: usize,
    pub pairs: usize,
    pub alpha: f64,
    pub literal_loss: bool,
    pub epsilon: f64,
    pub tolerance: f64,
    pub seed: u64,
    /// Parameter whose largest-magnitude gradient entry gets doubled.
    pub corrupt: Option<String>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            mode: ModelMode::Eacm,
            vocab_size: 20,
            emb_dim: 8,
            hidden_dim: 8,
            attn_dim: 8,
            num_layers: 2,
            init_scale: 0.5,
            max_len: 5,
            pairs: 2,
            alpha: 0.5,
            literal_loss: false,
            epsilon: 1e-3,
            tolerance: 1e-2,
            seed: 11,
            corrupt: None,
        }
    }
}

impl GradCheckConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            mode: self.mode,
            vocab_size: self.vocab_size,
            emb_dim: self.emb_dim,
            hidden_dim: self.hidden_dim,
            attn_dim: self.attn_dim,
            emo_dim: self.emb_dim,
            num_layers: self.num_layers,
            init_scale: self.init_scale,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "vocab_size" => self.vocab_size = kv::parse_value(key, value)?,
            "emb_dim" => self.emb_dim = kv::parse_value(key, value)?,
            "hidden_dim" => self.hidden_dim = kv::parse_value(key, value)?,
            "attn_dim" => self.attn_dim = kv::parse_value(key, value)?,
            "num_layers" => self.num_layers = kv::parse_value(key, value)?,
            "init_scale" => self.init_scale = kv::parse_value(key, value)?,
            "max_len" => self.max_len = kv::parse_value(key, value)?,
            "pairs" => self.pairs = kv::parse_value(key, value)?,
            "alpha" => self.alpha = kv::parse_value(key, value)?,
            "literal_loss" => self.literal_loss = kv::parse_value(key, value)?,
            "epsilon" => self.epsilon = kv::parse_value(key, value)?,
            "tolerance" => self.tolerance = kv::parse_value(key, value)?,
            "seed" => self.seed = kv::parse_value(key, value)?,
            "corrupt" => self.corrupt = (!value.is_empty()).then(|| value.to_string()),
            other => return Err(Error::Config(format!("unknown gradcheck key `{other}`"))),
        }
        Ok(())
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "mode = {}\nvocab_size = {}\nemb_dim = {}\nhidden_dim = {}\nattn_dim = {}\nnum_layers = {}\n\
             init_scale = {}\nmax_len = {}\npairs = {}\nalpha = {}\nliteral_loss = {}\nepsilon = {}\ntolerance = {}\n\
             seed = {}\ncorrupt = {}\n",
            self.mode,
            self.vocab_size,
            self.emb_dim,
            self.hidden_dim,
            self.attn_dim,
            self.num_layers,
            self.init_scale,
            self.max_len,
            self.pairs,
            self.alpha,
            self.literal_loss,
            self.epsilon,
            self.tolerance,
            self.seed,
            self.corrupt.as_deref().unwrap_or(""),
        )
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = GradCheckConfig::default();
        for (k, v) in kv::parse(text, origin)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }
}

/// Random pairs over non-reserved ids. Posts have at least two tokens so
/// attention has more than one position to weigh; responses leave room for
/// the closing EOS within `max_len`.
pub fn random_pairs(count: usize, vocab_size: usize, max_len: usize, seed: u64) -> Vec<ConversationPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = RESERVED.len() as u32;
    let seq = |rng: &mut ChaCha8Rng, min: usize| -> Vec<u32> {
        let n = rng.gen_range(min.min(max_len)..=max_len);
        (0..n).map(|_| rng.gen_range(lo..vocab_size as u32)).collect()
    };
    let emo = |rng: &mut ChaCha8Rng| Emotion::ALL[rng.gen_range(0..NUM_EMOTIONS)];
    (0..count)
        .map(|_| {
            let post = seq(&mut rng, 2);
            let mut response = seq(&mut rng, 1);
            response.truncate(max_len.saturating_sub(1).max(1));
            ConversationPair {
                post,
                response,
                post_labels: (emo(&mut rng), emo(&mut rng)),
                response_labels: (emo(&mut rng), Emotion::Other),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ModelCheckOutcome {
    pub report: GradCheckReport,
    pub passed: bool,
    pub parameters: usize,
    /// Entry doubled when a corruption was requested.
    pub corrupted: Option<(String, usize)>,
}

/// Compares autodiff against central differences for every entry of every
/// parameter, on the mean combined loss over a few random pairs.
pub fn gradcheck_model(cfg: &GradCheckConfig) -> Result<ModelCheckOutcome> {
    let model: Model<f64> = Model::new(cfg.model_config(), cfg.seed)?;
    let pairs = random_pairs(cfg.pairs.max(1), cfg.vocab_size, cfg.max_len.max(2), cfg.seed.wrapping_add(1));
    let obj = Objective {
        alpha: cfg.alpha,
        literal: cfg.literal_loss,
    };
    let loss_fn = |g: &mut Graph<'_, f64>| {
        let mut terms = Vec::with_capacity(pairs.len());
        for p in &pairs {
            terms.push(model.example_loss(g, p, obj)?.total);
        }
        let all = g.concat(&terms)?;
        let s = g.sum(all);
        Ok(g.scale(s, 1.0 / pairs.len() as f64))
    };

    let mut check = GradCheck::new(cfg.epsilon);
    let mut corrupted = None;
    if let Some(name) = &cfg.corrupt {
        let id = model
            .params
            .id(name)
            .ok_or_else(|| Error::Config(format!("no parameter named `{name}`")))?;
        let grads = {
            let mut g = Graph::new(&model.params);
            let l = loss_fn(&mut g)?;
            g.backward(l)?
        };
        let index = grads.param(id).map_or(0, |t| {
            let d = t.data();
            (0..d.len()).fold(0, |best, i| if d[i].abs() > d[best].abs() { i } else { best })
        });
        check = check.corrupt(id, index);
        corrupted = Some((name.clone(), index));
    }
    let mut params: ParamStore<f64> = model.params.clone();
    let report = check.run(&mut params, loss_fn)?;
    Ok(ModelCheckOutcome {
        passed: report.passes(cfg.tolerance),
        parameters: params.len(),
        report,
        corrupted,
    })
}
