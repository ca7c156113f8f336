use std::path::{Path, PathBuf};

use crate::corpus::CorpusFormat;
use crate::error::{Error, Result};
use crate::kv;
use crate::model::{ModelConfig, ModelMode, Objective};

/// Everything a training run depends on. Serialized as flat `key = value`
/// text; every key is optional on input and falls back to [`Default`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub mode: ModelMode,
    pub alpha: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Global gradient-norm threshold; `0` disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
    /// Keep only the positive-label terms of the selector loss.
    pub literal_loss: bool,
    pub vocab_cap: usize,
    pub max_len: usize,
    pub decode_max_len: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    pub attn_dim: usize,
    pub emo_dim: usize,
    pub num_layers: usize,
    pub init_scale: f64,
    pub corpus_format: CorpusFormat,
    /// Pretrained vectors for the selector's sentiment-role table.
    pub sentiment_embeddings: Option<PathBuf>,
    /// Pretrained vectors for the semantic-role and generator word tables.
    pub semantic_embeddings: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: ModelMode::Eacm,
            alpha: 0.5,
            learning_rate: 0.1,
            batch_size: 16,
            epochs: 10,
            clip_norm: 5.0,
            seed: 7,
            literal_loss: false,
            vocab_cap: 200,
            max_len: 20,
            decode_max_len: 50,
            emb_dim: 32,
            hidden_dim: 64,
            attn_dim: 64,
            emo_dim: 32,
            num_layers: 2,
            init_scale: 0.08,
            corpus_format: CorpusFormat::JsonLines,
            sentiment_embeddings: None,
            semantic_embeddings: None,
        }
    }
}

const KEYS: &[&str] = &[
    "mode",
    "alpha",
    "learning_rate",
    "batch_size",
    "epochs",
    "clip_norm",
    "seed",
    "literal_loss",
    "vocab_cap",
    "max_len",
    "decode_max_len",
    "emb_dim",
    "hidden_dim",
    "attn_dim",
    "emo_dim",
    "num_layers",
    "init_scale",
    "corpus_format",
    "sentiment_embeddings",
    "semantic_embeddings",
];

impl TrainConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.clip_norm.is_nan() || self.clip_norm < 0.0 {
            return Err(Error::Config("clip_norm must be non-negative".into()));
        }
        if self.max_len == 0 || self.decode_max_len == 0 {
            return Err(Error::Config("max_len and decode_max_len must be positive".into()));
        }
        if self.vocab_cap <= crate::corpus::RESERVED.len() {
            return Err(Error::Config("vocab_cap must exceed the reserved tokens".into()));
        }
        self.model_config(self.vocab_cap).validate()
    }

    pub fn model_config(&self, vocab_size: usize) -> ModelConfig {
        ModelConfig {
            mode: self.mode,
            vocab_size,
            emb_dim: self.emb_dim,
            hidden_dim: self.hidden_dim,
            attn_dim: self.attn_dim,
            emo_dim: self.emo_dim,
            num_layers: self.num_layers,
            init_scale: self.init_scale,
        }
    }

    pub fn objective(&self) -> Objective {
        Objective {
            alpha: self.alpha,
            literal: self.literal_loss,
        }
    }

    pub fn clip(&self) -> Option<f64> {
        (self.clip_norm > 0.0).then_some(self.clip_norm)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "mode" => self.mode = value.parse()?,
            "alpha" => self.alpha = kv::parse_value(key, value)?,
            "learning_rate" => self.learning_rate = kv::parse_value(key, value)?,
            "batch_size" => self.batch_size = kv::parse_value(key, value)?,
            "epochs" => self.epochs = kv::parse_value(key, value)?,
            "clip_norm" => self.clip_norm = kv::parse_value(key, value)?,
            "seed" => self.seed = kv::parse_value(key, value)?,
            "literal_loss" => self.literal_loss = kv::parse_value(key, value)?,
            "vocab_cap" => self.vocab_cap = kv::parse_value(key, value)?,
            "max_len" => self.max_len = kv::parse_value(key, value)?,
            "decode_max_len" => self.decode_max_len = kv::parse_value(key, value)?,
            "emb_dim" => self.emb_dim = kv::parse_value(key, value)?,
            "hidden_dim" => self.hidden_dim = kv::parse_value(key, value)?,
            "attn_dim" => self.attn_dim = kv::parse_value(key, value)?,
            "emo_dim" => self.emo_dim = kv::parse_value(key, value)?,
            "num_layers" => self.num_layers = kv::parse_value(key, value)?,
            "init_scale" => self.init_scale = kv::parse_value(key, value)?,
            "corpus_format" => self.corpus_format = value.parse()?,
            "sentiment_embeddings" => self.sentiment_embeddings = path(value),
            "semantic_embeddings" => self.semantic_embeddings = path(value),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        match key {
            "mode" => self.mode.to_string(),
            "alpha" => self.alpha.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "epochs" => self.epochs.to_string(),
            "clip_norm" => self.clip_norm.to_string(),
            "seed" => self.seed.to_string(),
            "literal_loss" => self.literal_loss.to_string(),
            "vocab_cap" => self.vocab_cap.to_string(),
            "max_len" => self.max_len.to_string(),
            "decode_max_len" => self.decode_max_len.to_string(),
            "emb_dim" => self.emb_dim.to_string(),
            "hidden_dim" => self.hidden_dim.to_string(),
            "attn_dim" => self.attn_dim.to_string(),
            "emo_dim" => self.emo_dim.to_string(),
            "num_layers" => self.num_layers.to_string(),
            "init_scale" => self.init_scale.to_string(),
            "corpus_format" => self.corpus_format.to_string(),
            "sentiment_embeddings" => path(&self.sentiment_embeddings),
            "semantic_embeddings" => path(&self.semantic_embeddings),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    /// `(key, value)` for every key, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k))).collect()
    }

    pub fn to_kv_string(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Defaults overridden by the keys present in `text`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (k, v) in kv::parse(text, origin)? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}
