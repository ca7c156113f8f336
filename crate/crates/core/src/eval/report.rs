use std::fmt::Write as _;

use super::distinct::{distinct_n_with, DistinctDenominator};
use super::oracle::{response_quality, Oracle};
use crate::corpus::{Emotion, EipMatrix, RawRecord, Vocabulary, EOS};
use crate::error::{Error, Result};
use crate::model::{Model, ModelMode};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Posts longer than this are truncated before encoding.
    pub max_len: usize,
    pub decode_max_len: usize,
    pub denominator: DistinctDenominator,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_len: 20,
            decode_max_len: 50,
            denominator: DistinctDenominator::Ngrams,
        }
    }
}

/// One test post with its generated reply and scores.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredResponse {
    pub post: String,
    pub response: String,
    pub gold_emotion: Emotion,
    /// Argmax of the selector's `ê_r`.
    pub selected_emotion: Emotion,
    /// Oracle category of the reply; `None` when unclassified or no oracle.
    pub reply_emotion: Option<Emotion>,
    pub sentiment: Option<u8>,
    pub semantic: Option<u8>,
    pub quality: Option<u8>,
    /// The sentiment oracle found no keyword to judge by.
    pub unclassified: bool,
}

/// Oracle-based means; present only when an oracle was supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleScores {
    pub sentiment: f64,
    pub semantic: f64,
    pub quality: f64,
    pub unclassified: usize,
    /// Percentages for sentiment-semantic cells 1-1, 1-0, 0-1, 0-0.
    pub cells: [f64; 4],
    /// Gold post category against the oracle category of the reply;
    /// unclassified replies count as `Other`.
    pub eip: EipMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub mode: ModelMode,
    pub responses: usize,
    pub distinct_1: f64,
    pub distinct_2: f64,
    pub denominator: DistinctDenominator,
    /// Fraction of posts whose `ê_r` argmax equals the gold response category.
    pub selector_accuracy: f64,
    pub oracle: Option<OracleScores>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub report: EvalReport,
    pub scored: Vec<ScoredResponse>,
}

/// Greedy-decodes every test post and scores the replies. In seq2seq_emb
/// mode the generator is driven by the gold response category.
pub fn evaluate(
    model: &Model<f32>,
    vocab: &Vocabulary,
    records: &[RawRecord],
    oracle: Option<&Oracle>,
    opts: &EvalOptions,
) -> Result<Evaluation> {
    if opts.max_len == 0 || opts.decode_max_len == 0 {
        return Err(Error::Config("max_len and decode_max_len must be positive".into()));
    }
    let mut generated: Vec<Vec<u32>> = Vec::with_capacity(records.len());
    let mut scored = Vec::with_capacity(records.len());
    let mut hits = 0usize;
    for r in records {
        let mut post = vocab.encode(&r.post);
        post.truncate(opts.max_len);
        let designated = (model.mode() == ModelMode::Seq2seqEmb).then_some(r.response_labels.0);
        let reply = model.reply(&post, designated, opts.decode_max_len)?;
        let mut tokens = reply.tokens;
        if tokens.last() == Some(&EOS) {
            tokens.pop();
        }
        let words: Vec<&str> = vocab.decode(&tokens);
        let post_words: Vec<&str> = r.post.split_whitespace().collect();
        let selected = reply.response_emotion.argmax();
        hits += usize::from(selected == r.response_labels.0);
        let (reply_emotion, sentiment, semantic, quality, unclassified) = match oracle {
            Some(o) => {
                let s = o.sentiment_score(&words, &post_words);
                let m = o.semantic_score(&words, &post_words)?;
                let q = response_quality(s.score, m);
                (o.classify(&words), Some(s.score), Some(m), Some(q), s.unclassified)
            }
            None => (None, None, None, None, false),
        };
        scored.push(ScoredResponse {
            post: r.post.clone(),
            response: words.join(" "),
            gold_emotion: r.response_labels.0,
            selected_emotion: selected,
            reply_emotion,
            sentiment,
            semantic,
            quality,
            unclassified,
        });
        generated.push(tokens);
    }

    let n = records.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let oracle_scores = oracle.map(|_| {
        let count = |f: &dyn Fn(&ScoredResponse) -> bool| scored.iter().filter(|s| f(s)).count();
        let cell = |a: u8, b: u8| 100.0 * frac(count(&|s| s.sentiment == Some(a) && s.semantic == Some(b)));
        OracleScores {
            sentiment: frac(count(&|s| s.sentiment == Some(1))),
            semantic: frac(count(&|s| s.semantic == Some(1))),
            quality: frac(count(&|s| s.quality == Some(1))),
            unclassified: count(&|s| s.unclassified),
            cells: [cell(1, 1), cell(1, 0), cell(0, 1), cell(0, 0)],
            eip: EipMatrix::from_label_pairs(
                records
                    .iter()
                    .zip(&scored)
                    .map(|(r, s)| (r.post_labels.0, s.reply_emotion.unwrap_or(Emotion::Other))),
            ),
        }
    });
    Ok(Evaluation {
        report: EvalReport {
            mode: model.mode(),
            responses: n,
            distinct_1: distinct_n_with(&generated, 1, opts.denominator),
            distinct_2: distinct_n_with(&generated, 2, opts.denominator),
            denominator: opts.denominator,
            selector_accuracy: frac(hits),
            oracle: oracle_scores,
        },
        scored,
    })
}

impl EvalReport {
    /// Flat `key = value` text.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "responses = {}", self.responses);
        let _ = writeln!(s, "distinct_1 = {}", self.distinct_1);
        let _ = writeln!(s, "distinct_2 = {}", self.distinct_2);
        let _ = writeln!(s, "distinct_denominator = {}", self.denominator.name());
        let _ = writeln!(s, "selector_accuracy = {}", self.selector_accuracy);
        if let Some(o) = &self.oracle {
            let _ = writeln!(s, "sentiment_score = {}", o.sentiment);
            let _ = writeln!(s, "semantic_score = {}", o.semantic);
            let _ = writeln!(s, "response_quality = {}", o.quality);
            let _ = writeln!(s, "sentiment_unclassified = {}", o.unclassified);
            for (name, v) in ["1-1", "1-0", "0-1", "0-0"].iter().zip(o.cells) {
                let _ = writeln!(s, "percent_{name} = {v}");
            }
        }
        s
    }

    pub fn eip_csv(&self) -> Option<String> {
        self.oracle.as_ref().map(|o| o.eip.to_csv())
    }
}

/// Tab-separated audit rows: post, reply, gold category, selected category,
/// reply category, sentiment, semantic, quality.
pub fn audit_tsv(scored: &[ScoredResponse]) -> String {
    let opt = |v: Option<u8>| v.map_or("-".to_string(), |v| v.to_string());
    let mut s = String::from("post\tresponse\tgold\tselected\treply_emotion\tsentiment\tsemantic\tquality\n");
    for r in scored {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.post,
            r.response,
            r.gold_emotion,
            r.selected_emotion,
            r.reply_emotion.map_or("-".to_string(), |e| e.to_string()),
            opt(r.sentiment),
            opt(r.semantic),
            opt(r.quality),
        );
    }
    s
}
