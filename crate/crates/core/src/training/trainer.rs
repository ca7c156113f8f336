use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::embeddings::load_embeddings;
use crate::corpus::{ConversationPair, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{Model, ModelMode, Objective};
use crate::numerics::{sgd_step, Gradients, Graph};

/// Mean losses over one epoch, measured on each example just before the
/// update that used it. `selector` is `0` in seq2seq mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub selector: f64,
    pub seq2seq: f64,
    pub total: f64,
}

pub const LOSS_LOG_HEADER: &str = "epoch,L_e,L_seq2seq,L_EACM";

pub fn loss_log_csv(log: &[EpochLoss]) -> String {
    let mut out = format!("{LOSS_LOG_HEADER}\n");
    for e in log {
        out += &format!("{},{},{},{}\n", e.epoch, e.selector, e.seq2seq, e.total);
    }
    out
}

/// Freshly initialized model for `vocab`, with pretrained vectors loaded if
/// the config names any.
pub fn initial_model(cfg: &TrainConfig, vocab: &Vocabulary) -> Result<Model<f32>> {
    cfg.validate()?;
    let mut model = Model::new(cfg.model_config(vocab.len()), cfg.seed)?;
    if let Some(path) = &cfg.sentiment_embeddings {
        load_embeddings(path, vocab, &mut model.params, model.selector.sentiment_embedding)?;
    }
    if let Some(path) = &cfg.semantic_embeddings {
        for table in [
            model.selector.semantic_embedding,
            model.generator.encoder_embedding,
            model.generator.decoder_embedding,
        ] {
            load_embeddings(path, vocab, &mut model.params, table)?;
        }
    }
    Ok(model)
}

/// Loss sums for a set of pairs, without updating anything.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossSums {
    pub selector: f64,
    pub seq2seq: f64,
    pub total: f64,
    pub count: usize,
}

impl LossSums {
    fn add(&mut self, selector: f64, seq2seq: f64, total: f64) {
        self.selector += selector;
        self.seq2seq += seq2seq;
        self.total += total;
        self.count += 1;
    }

    pub fn means(&self) -> (f64, f64, f64) {
        let n = self.count.max(1) as f64;
        (self.selector / n, self.seq2seq / n, self.total / n)
    }
}

pub fn mean_losses(model: &Model<f32>, pairs: &[ConversationPair], obj: Objective) -> Result<LossSums> {
    let mut sums = LossSums::default();
    for pair in pairs {
        let mut g = Graph::inference(&model.params);
        let l = model.example_loss(&mut g, pair, obj)?;
        let sel = l.selector.map_or(0.0, |v| g.value(v).item() as f64);
        sums.add(sel, g.value(l.seq2seq).item() as f64, g.value(l.total).item() as f64);
    }
    Ok(sums)
}

/// Mini-batch SGD on the model's own objective. Batches follow a seeded
/// shuffle; each batch gradient is the mean over its examples and is clipped
/// by global norm before the step. Calls `on_epoch` after every epoch and
/// stops early once it returns `false`.
pub fn train(
    model: &mut Model<f32>,
    pairs: &[ConversationPair],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLoss, &Model<f32>) -> bool,
) -> Result<Vec<EpochLoss>> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("train", "corpus is empty"));
    }
    let obj = cfg.objective();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = LossSums::default();
        for (batch_index, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut acc = Gradients::empty(model.params.len());
            let scale = 1.0 / batch.len() as f32;
            for &i in batch {
                let mut g = Graph::new(&model.params);
                let l = model.example_loss(&mut g, &pairs[i], obj)?;
                let total = g.value(l.total).item() as f64;
                if !total.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        batch: batch_index,
                    });
                }
                let sel = l.selector.map_or(0.0, |v| g.value(v).item() as f64);
                sums.add(sel, g.value(l.seq2seq).item() as f64, total);
                let grads = g.backward(l.total)?;
                acc.add_scaled(&grads, scale);
            }
            model.params.zero_grad();
            acc.accumulate_into(&mut model.params);
            let norm = sgd_step(&mut model.params, cfg.learning_rate, cfg.clip())?;
            if !norm.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_index,
                });
            }
        }
        let (selector, seq2seq, total) = sums.means();
        let entry = EpochLoss {
            epoch,
            selector,
            seq2seq,
            total,
        };
        log.push(entry);
        if !on_epoch(&entry, model) {
            break;
        }
    }
    Ok(log)
}

/// Generator-only training in seq2seq mode. The result is meant as the
/// initialization of a later run via [`Model::warm_start`].
pub fn pretrain(
    pairs: &[ConversationPair],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochLoss, &Model<f32>) -> bool,
) -> Result<(Checkpoint, Vec<EpochLoss>)> {
    if cfg.mode != ModelMode::Seq2seq {
        return Err(Error::Config(format!(
            "pretraining runs in seq2seq mode, config says {}",
            cfg.mode
        )));
    }
    let mut model = initial_model(cfg, vocab)?;
    let log = train(&mut model, pairs, cfg, on_epoch)?;
    Ok((Checkpoint::new(cfg.clone(), vocab.clone(), model), log))
}
