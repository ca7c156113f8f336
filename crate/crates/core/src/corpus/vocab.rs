use std::collections::HashMap;

use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const SOS: u32 = 2;
pub const EOS: u32 = 3;
pub const RESERVED: [&str; 4] = ["<pad>", "<unk>", "<sos>", "<eos>"];

/// Token/id bijection with four reserved ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds from tokenized sentences: descending frequency, ties broken
    /// lexicographically, truncated so the total size (reserved ids included)
    /// stays within `cap`.
    pub fn build<'a, I, S>(sentences: I, cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        if cap < RESERVED.len() {
            return Err(Error::Config(format!(
                "vocabulary cap {cap} is smaller than the {} reserved tokens",
                RESERVED.len()
            )));
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for tok in s {
                if !RESERVED.contains(&tok) {
                    *freq.entry(tok).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words = ranked
            .into_iter()
            .take(cap - RESERVED.len())
            .map(|(w, _)| w.to_string());
        Self::from_tokens(RESERVED.iter().map(|s| s.to_string()).chain(words).collect())
    }

    /// Rebuilds from an id-ordered token list (first four must be reserved).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len()
            || tokens.iter().zip(RESERVED).any(|(t, r)| t != r)
        {
            return Err(Error::Config("vocabulary must start with the reserved tokens".into()));
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid vocabulary token {t:?}")));
            }
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Vocabulary { tokens, ids })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Whitespace tokenization; out-of-vocabulary words become `UNK`.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        text.split_whitespace().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or(RESERVED[UNK as usize]))
            .collect()
    }

    /// Decodes up to (not including) the first `EOS`.
    pub fn decode_sentence(&self, ids: &[u32]) -> String {
        let end = ids.iter().position(|&i| i == EOS).unwrap_or(ids.len());
        self.decode(&ids[..end]).join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        let sents = ["b a c a", "c a d"];
        Vocabulary::build(sents.iter().map(|s| s.split_whitespace()), 100).unwrap()
    }

    #[test]
    fn frequency_then_lexicographic_order() {
        let v = vocab();
        assert_eq!(&v.tokens()[4..], &["a", "c", "b", "d"]);
        assert_eq!(v.id("<eos>"), EOS);
    }

    #[test]
    fn cap_includes_reserved() {
        let sents = ["b a c a", "c a d"];
        let v = Vocabulary::build(sents.iter().map(|s| s.split_whitespace()), 6).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.encode("a c b z"), vec![4, 5, UNK, UNK]);
    }

    #[test]
    fn oov_maps_to_unk() {
        assert_eq!(vocab().encode("zzz a"), vec![UNK, 4]);
    }

    #[test]
    fn decode_stops_at_eos() {
        let v = vocab();
        assert_eq!(v.decode_sentence(&[4, 5, EOS, 6]), "a c");
    }
}
