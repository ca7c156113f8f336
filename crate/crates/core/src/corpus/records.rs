use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::emotion::{multi_hot, Emotion, EmotionVector};
use super::vocab::{Vocabulary, EOS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One JSON object per line with `post`, `response`, `post_labels`,
    /// `response_labels`.
    #[default]
    JsonLines,
    /// `post<TAB>response<TAB>P1,P2<TAB>R1,R2`.
    Tsv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(CorpusFormat::JsonLines),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

impl std::fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorpusFormat::JsonLines => "jsonl",
            CorpusFormat::Tsv => "tsv",
        })
    }
}

/// Untokenized labeled conversation pair as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRecord {
    pub post: String,
    pub response: String,
    pub post_labels: (Emotion, Emotion),
    pub response_labels: (Emotion, Emotion),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    post: String,
    response: String,
    post_labels: Vec<String>,
    response_labels: Vec<String>,
}

/// Tokenized pair. Sequences exclude `SOS`/`EOS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConversationPair {
    pub post: Vec<u32>,
    pub response: Vec<u32>,
    pub post_labels: (Emotion, Emotion),
    pub response_labels: (Emotion, Emotion),
}

impl ConversationPair {
    pub fn post_emotion(&self) -> EmotionVector {
        multi_hot(self.post_labels.0, self.post_labels.1)
    }

    pub fn response_emotion(&self) -> EmotionVector {
        multi_hot(self.response_labels.0, self.response_labels.1)
    }

    /// Decoder target: response followed by `EOS`.
    pub fn target(&self) -> Vec<u32> {
        let mut t = self.response.clone();
        t.push(EOS);
        t
    }
}

fn labels(path: &str, line: usize, field: &str, v: &[String]) -> Result<(Emotion, Emotion)> {
    if v.len() != 2 {
        return Err(Error::Parse {
            path: path.into(),
            line,
            msg: format!("`{field}` needs exactly two labels, got {}", v.len()),
        });
    }
    let parse = |s: &str| {
        s.parse::<Emotion>().map_err(|_| Error::Parse {
            path: path.into(),
            line,
            msg: format!("unknown emotion `{s}` in `{field}`"),
        })
    };
    Ok((parse(&v[0])?, parse(&v[1])?))
}

fn parse_line(path: &str, line: usize, text: &str, format: CorpusFormat) -> Result<RawRecord> {
    let bad = |msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let wire = match format {
        CorpusFormat::JsonLines => serde_json::from_str::<WireRecord>(text)
            .map_err(|e| bad(format!("malformed record: {e}")))?,
        CorpusFormat::Tsv => {
            let f: Vec<&str> = text.split('\t').collect();
            if f.len() != 4 {
                return Err(bad(format!("expected 4 tab-separated fields, got {}", f.len())));
            }
            let split = |s: &str| s.split(',').map(|x| x.trim().to_string()).collect();
            WireRecord {
                post: f[0].into(),
                response: f[1].into(),
                post_labels: split(f[2]),
                response_labels: split(f[3]),
            }
        }
    };
    if wire.post.trim().is_empty() {
        return Err(bad("empty post".into()));
    }
    if wire.response.trim().is_empty() {
        return Err(bad("empty response".into()));
    }
    Ok(RawRecord {
        post_labels: labels(path, line, "post_labels", &wire.post_labels)?,
        response_labels: labels(path, line, "response_labels", &wire.response_labels)?,
        post: wire.post,
        response: wire.response,
    })
}

pub fn parse_records(text: &str, origin: &str, format: CorpusFormat) -> Result<Vec<RawRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(origin, i + 1, l, format))
        .collect()
}

pub fn read_records(path: &Path, format: CorpusFormat) -> Result<Vec<RawRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text, &path.display().to_string(), format)
}

/// One JSON record per line, keys in canonical order.
pub fn format_record(r: &RawRecord) -> String {
    let wire = WireRecord {
        post: r.post.clone(),
        response: r.response.clone(),
        post_labels: vec![r.post_labels.0.to_string(), r.post_labels.1.to_string()],
        response_labels: vec![
            r.response_labels.0.to_string(),
            r.response_labels.1.to_string(),
        ],
    };
    serde_json::to_string(&wire).expect("string fields serialize")
}

pub fn write_records(path: &Path, records: &[RawRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        writeln!(out, "{}", format_record(r)).expect("write to vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Tokenizes records; sequences longer than `max_len` are truncated.
pub fn encode_records(
    records: &[RawRecord],
    vocab: &Vocabulary,
    max_len: usize,
) -> Vec<ConversationPair> {
    records
        .iter()
        .map(|r| {
            let mut post = vocab.encode(&r.post);
            let mut response = vocab.encode(&r.response);
            post.truncate(max_len);
            response.truncate(max_len);
            ConversationPair {
                post,
                response,
                post_labels: r.post_labels,
                response_labels: r.response_labels,
            }
        })
        .collect()
}

pub fn build_vocab(records: &[RawRecord], cap: usize) -> Result<Vocabulary> {
    Vocabulary::build(
        records
            .iter()
            .flat_map(|r| [r.post.split_whitespace(), r.response.split_whitespace()]),
        cap,
    )
}

/// Reads a corpus and builds its vocabulary from every record in it.
pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    vocab_cap: usize,
    max_len: usize,
) -> Result<(Vec<ConversationPair>, Vocabulary)> {
    let records = read_records(path, format)?;
    let vocab = build_vocab(&records, vocab_cap)?;
    Ok((encode_records(&records, &vocab, max_len), vocab))
}
